//! CSV emission with fixed headers and 17-significant-digit floats, so two
//! runs of the same config produce byte-identical files.

use crate::diagnostics::EnergySample;
use crate::error::Result;
use std::io::Write;
use std::path::Path;

use super::sweep::SweepRow;

/// 17 significant digits in scientific notation.
pub fn format_g17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_snapshot<W: Write>(mut w: W, xs: &[f64], pressure_pa: &[f64]) -> Result<()> {
    writeln!(w, "x,pressure_pa")?;
    for (x, p) in xs.iter().zip(pressure_pa) {
        writeln!(w, "{},{}", format_g17(*x), format_g17(*p))?;
    }
    Ok(())
}

pub fn write_energy<W: Write>(mut w: W, samples: &[EnergySample]) -> Result<()> {
    writeln!(w, "t,E,e_psit,e_gradpsi,e_psitt,e_gradpsit,e_lappsi")?;
    for s in samples {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            format_g17(s.t),
            format_g17(s.total),
            format_g17(0.5 * s.psi_t_sq),
            format_g17(0.5 * s.grad_psi_sq),
            format_g17(0.5 * s.psi_tt_sq),
            format_g17(0.5 * s.grad_psi_t_sq),
            format_g17(0.5 * s.lap_psi_sq),
        )?;
    }
    Ok(())
}

pub fn write_sweep<W: Write>(mut w: W, rows: &[SweepRow]) -> Result<()> {
    writeln!(w, "tau_s,error_ch1,error_xbarw")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{}",
            format_g17(r.tau),
            format_g17(r.error_ch1),
            format_g17(r.error_xbar_w),
        )?;
    }
    Ok(())
}

pub fn snapshot_to_file(path: &Path, xs: &[f64], pressure_pa: &[f64]) -> Result<()> {
    let mut buf = Vec::new();
    write_snapshot(&mut buf, xs, pressure_pa)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn energy_to_file(path: &Path, samples: &[EnergySample]) -> Result<()> {
    let mut buf = Vec::new();
    write_energy(&mut buf, samples)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn sweep_to_file(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut buf = Vec::new();
    write_sweep(&mut buf, rows)?;
    std::fs::write(path, buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_has_17_significant_digits() {
        assert_eq!(format_g17(0.1274), format!("{:.16e}", 0.1274f64));
        assert_eq!(format_g17(0.5), "5.0000000000000000e-1");
        assert_eq!(format_g17(0.0), "0.0000000000000000e0");
        // 17 significant digits: leading mantissa digit plus 16 fractional
        let s = format_g17(9.801e-7);
        let mantissa: String = s.chars().take_while(|c| *c != 'e').collect();
        assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
    }

    #[test]
    fn headers_are_bit_exact() {
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &[0.0], &[1.0]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,pressure_pa\n"));

        let mut buf = Vec::new();
        write_sweep(
            &mut buf,
            &[SweepRow {
                tau: 1e-7,
                error_ch1: 0.1,
                error_xbar_w: 0.2,
                error_xbar_k: None,
            }],
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("tau_s,error_ch1,error_xbarw\n"));

        let mut buf = Vec::new();
        write_energy(&mut buf, &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "t,E,e_psit,e_gradpsi,e_psitt,e_gradpsit,e_lappsi\n");
    }
}
