//! Companion matplotlib scripts for the CSV outputs.

use crate::config::ExperimentKind;

pub fn script(kind: ExperimentKind, files: &[String]) -> String {
    let style = match kind {
        ExperimentKind::PhaseSpace => "section",
        ExperimentKind::RdmHist | ExperimentKind::Spacing => "histogram",
        ExperimentKind::RmtBound => "bound",
        _ => "series",
    };
    let list = files.iter().map(|f| format!("    {f:?},\n")).collect::<String>();
    format!(
        r##"#!/usr/bin/env python3
# Regenerate with `kicktop ... --plots`; reads the CSVs next to this file.
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

HERE = Path(__file__).resolve().parent
STYLE = "{style}"
FILES = [
{list}]


def load(name):
    path = HERE / name
    with open(path) as fh:
        skip = sum(1 for line in fh if line.startswith("#"))
    return np.genfromtxt(path, delimiter=",", skip_header=skip, names=True)


for name in FILES:
    data = load(name)
    cols = data.dtype.names
    fig, ax = plt.subplots(figsize=(6, 4))
    if STYLE == "section":
        ax.scatter(data["phi"], np.cos(data["theta"]), s=0.2, c="k")
        ax.set_xlabel("phi")
        ax.set_ylabel("cos theta")
    elif STYLE == "histogram":
        width = data["bin_high"] - data["bin_low"]
        total = data["count"].sum()
        ax.bar(data["bin_low"], data["count"] / (total * width), width=width, align="edge", alpha=0.5)
        ax.step(data["bin_low"], data["theory_value"] / (total * width), where="post", color="k")
        ax.set_ylabel("density")
    elif STYLE == "bound":
        for n in np.unique(data["n"]):
            sel = data["n"] == n
            ax.plot(data["q"][sel], data["bound"][sel], label=f"N={{int(n)}}")
        ax.set_xscale("log")
        ax.set_xlabel("Q")
        ax.legend()
    else:
        for col in cols[1:]:
            ax.plot(data[cols[0]], data[col], label=col)
        ax.set_xlabel(cols[0])
        ax.legend()
    ax.set_title(name)
    fig.tight_layout()
    fig.savefig(HERE / (Path(name).stem + ".png"), dpi=150)
    plt.close(fig)
"##
    )
}
