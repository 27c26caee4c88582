use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use takiff_toda::toda::{Formulation, Trajectory};
use takiff_toda::CanonicalState;

use crate::error::CliError;

/// Scientific notation with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn trajectory_header(traj: &Trajectory) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for i in 1..=traj.rank {
        for j in 0..=traj.level {
            h.push(format!("rho{i}_{j}"));
        }
    }
    let coord = match traj.formulation {
        Formulation::Lax => "gamma",
        Formulation::Canonical => "phi",
    };
    for i in 1..=traj.rank {
        for j in 0..=traj.level {
            h.push(format!("{coord}{i}_{j}"));
        }
    }
    h.push("H".into());
    h.extend(traj.specs.iter().map(|s| format!("I{}_{}", s.power, s.index)));
    if traj.formulation == Formulation::Canonical && traj.rank == 1 {
        h.push("quartic_residual".into());
    }
    h
}

/// Writes a trajectory as CSV: a header row, then one row per point.
pub fn emit_trajectory(traj: &Trajectory, out: impl Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trajectory_header(traj))?;
    for p in &traj.points {
        let mut row = vec![fmt_float(p.t)];
        row.extend(p.state.rho.iter().flatten().map(|&v| fmt_float(v)));
        match traj.formulation {
            Formulation::Lax => row.extend(p.state.gamma.iter().flatten().map(|&v| fmt_float(v))),
            Formulation::Canonical => {
                let c = CanonicalState::from_raw(&p.state)?;
                for i in 0..traj.rank {
                    row.push(fmt_float(c.phi0[i]));
                    row.push(fmt_float(c.phi1[i]));
                }
            }
        }
        row.push(fmt_float(p.hamiltonian));
        row.extend(p.invariants.iter().map(|&v| fmt_float(v)));
        if let Some(q) = p.quartic_residual {
            row.push(fmt_float(q));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use takiff_toda::toda::{Method, Settings, TodaState, TodaSystem};

    fn trajectory(t_end: f64) -> Trajectory {
        let sys = TodaSystem::type_a(1, 1).unwrap();
        let init = TodaState::new(vec![vec![-1.34, 0.87]], vec![vec![0.4, 1.0]]).unwrap();
        sys.integrate(Formulation::Lax, &init, &Settings::new(t_end, 0.01, Method::Rk4)).unwrap()
    }

    fn csv_text(traj: &Trajectory) -> String {
        let mut buf = Vec::new();
        emit_trajectory(traj, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_trajectory_is_header_only() {
        let mut t = trajectory(0.0);
        t.points.clear();
        let text = csv_text(&t);
        assert_eq!(text.lines().count(), 1);
        assert_eq!(text.lines().next().unwrap(), "t,rho1_0,rho1_1,gamma1_0,gamma1_1,H,I2_0,I2_1");
    }

    #[test]
    fn three_points_give_four_lines() {
        let t = trajectory(0.02);
        assert_eq!(t.points.len(), 3);
        assert_eq!(csv_text(&trajectory(0.02)).lines().count(), 4);
    }

    #[test]
    fn values_round_trip_exactly() {
        let t = trajectory(0.5);
        let text = csv_text(&t);
        let mut r = csv::Reader::from_reader(text.as_bytes());
        for (rec, p) in r.records().zip(&t.points) {
            let rec = rec.unwrap();
            let vals: Vec<f64> = rec.iter().map(|s| s.parse().unwrap()).collect();
            assert_eq!(vals[0].to_bits(), p.t.to_bits());
            for (v, s) in vals[1..5].iter().zip(p.state.flatten()) {
                assert_eq!(v.to_bits(), s.to_bits());
            }
            assert_eq!(vals[5].to_bits(), p.hamiltonian.to_bits());
        }
        assert_eq!(fmt_float(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
