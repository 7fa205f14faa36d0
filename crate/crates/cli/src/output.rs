//! CSV time series and matplotlib stubs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use delay_hopf::dde::Trajectory;

use crate::error::{CliError, CliResult};
use crate::scenario::Output;

pub const CSV_HEADER: &str = "t,x,y,z,u";

/// One row per knot from `t = 0`, states in the simulation frame.
pub fn csv_text(traj: &Trajectory<4>) -> String {
    let mut out = String::with_capacity(traj.len() * 5 * 24 + 16);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let _ = writeln!(out, "{t:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", s[0], s[1], s[2], s[3]);
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn stub(csv_name: &str, body: &str) -> String {
    format!(
        "import csv\nimport matplotlib.pyplot as plt\n\n\
         with open({csv_name:?}) as f:\n    rows = list(csv.DictReader(f))\n\
         col = {{k: [float(r[k]) for r in rows] for k in rows[0]}}\n\n{body}plt.show()\n"
    )
}

/// Python script plotting `csv_name` for one plot kind, or `None` for
/// outputs that are not plots.
pub fn plot_stub(kind: Output, csv_name: &str) -> Option<String> {
    let body = match kind {
        Output::Timeseries => {
            "fig, axes = plt.subplots(4, 1, sharex=True)\n\
             for ax, k in zip(axes, \"xyzu\"):\n    ax.plot(col[\"t\"], col[k])\n    ax.set_ylabel(k)\n\
             axes[-1].set_xlabel(\"t\")\n"
        }
        Output::Phase2d => "plt.plot(col[\"x\"], col[\"y\"], lw=0.5)\nplt.xlabel(\"x\")\nplt.ylabel(\"y\")\n",
        Output::Phase3d => {
            "ax = plt.figure().add_subplot(projection=\"3d\")\n\
             ax.plot(col[\"x\"], col[\"y\"], col[\"z\"], lw=0.5)\n\
             ax.set_xlabel(\"x\")\nax.set_ylabel(\"y\")\nax.set_zlabel(\"z\")\n"
        }
        Output::Report => return None,
    };
    Some(stub(csv_name, body))
}

fn kind_name(kind: Output) -> &'static str {
    match kind {
        Output::Timeseries => "timeseries",
        Output::Phase2d => "phase2d",
        Output::Phase3d => "phase3d",
        Output::Report => "report",
    }
}

/// Writes `<stem>.csv` and a `<stem>_<kind>.py` per requested plot.
/// Returns every path written.
pub fn write_series(dir: &Path, stem: &str, traj: &Trajectory<4>, plots: &[Output]) -> CliResult<Vec<PathBuf>> {
    let csv_name = format!("{stem}.csv");
    let csv_path = dir.join(&csv_name);
    write_file(&csv_path, &csv_text(traj))?;
    let mut written = vec![csv_path];
    for &kind in plots {
        if let Some(script) = plot_stub(kind, &csv_name) {
            let path = dir.join(format!("{stem}_{}.py", kind_name(kind)));
            write_file(&path, &script)?;
            written.push(path);
        }
    }
    Ok(written)
}
