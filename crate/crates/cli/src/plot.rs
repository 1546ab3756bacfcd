//! Generated matplotlib helpers. They only read the CSVs sitting next to
//! them; nothing is rendered here.

/// Population against time for each trajectory CSV.
pub(crate) fn dynamics_plot_script(csvs: &[&str]) -> String {
    let files = csvs
        .iter()
        .map(|f| format!("    \"{f}\",\n"))
        .collect::<String>();
    format!(
        r#"#!/usr/bin/env python3
"""Plot excited-state population from the trajectory CSVs in this directory."""
import csv
import pathlib
import sys

import matplotlib.pyplot as plt

HERE = pathlib.Path(__file__).resolve().parent
FILES = [
{files}]


def load(path):
    with open(path) as fh:
        rows = [r for r in csv.DictReader(fh)]
    return [float(r["t_fs"]) for r in rows], [float(r["population"]) for r in rows], rows[0]["method"]


def main():
    fig, ax = plt.subplots(figsize=(6, 4))
    for name in FILES:
        t, p, method = load(HERE / name)
        ax.plot(t, p, label=f"{{method}} ({{name}})")
    ax.set_xlabel("t (fs)")
    ax.set_ylabel("P_a(t)")
    ax.legend()
    fig.tight_layout()
    out = HERE / "population.png"
    fig.savefig(out, dpi=150)
    print(out, file=sys.stderr)


if __name__ == "__main__":
    main()
"#
    )
}
