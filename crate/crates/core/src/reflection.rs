//! TM and TE reflection coefficients of a graphene sheet on the imaginary
//! frequency axis, in the dimensionless variables `(zeta, y)`.

use crate::error::{domain, Error, Result};
use crate::quadrature::QuadratureSpec;
use crate::response::{phi00, polarization_finite_t, DiracOperator, MatsubaraPoint};

/// Characteristic wave number of the hydrodynamic model, 1/m.
pub const DEFAULT_WAVENUMBER: f64 = 6.75e5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydrodynamicParams {
    /// Characteristic wave number `K`, 1/m.
    pub wavenumber: f64,
}

impl HydrodynamicParams {
    pub fn new(wavenumber: f64) -> Result<Self> {
        if !(wavenumber > 0.0 && wavenumber.is_finite()) {
            return domain(format!("wave number must be positive, got {wavenumber}"));
        }
        Ok(HydrodynamicParams { wavenumber })
    }
}

impl Default for HydrodynamicParams {
    fn default() -> Self {
        HydrodynamicParams {
            wavenumber: DEFAULT_WAVENUMBER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionPair {
    pub r_tm: f64,
    pub r_te: f64,
}

impl ReflectionPair {
    pub const IDEAL_METAL: ReflectionPair = ReflectionPair { r_tm: 1.0, r_te: -1.0 };
    pub const TRANSPARENT: ReflectionPair = ReflectionPair { r_tm: 0.0, r_te: 0.0 };
}

fn check_cone(zeta: f64, y: f64) -> Result<()> {
    if !(zeta >= 0.0 && y >= zeta && y.is_finite()) {
        return domain(format!("need y >= zeta >= 0, got zeta={zeta}, y={y}"));
    }
    Ok(())
}

/// `r_TM = Kt y / (Kt y + zeta^2)`, `r_TE = -Kt / (Kt + y)` with `Kt = 2aK`.
pub fn hydro_coefficients(zeta: f64, y: f64, k_tilde: f64) -> Result<ReflectionPair> {
    check_cone(zeta, y)?;
    if y == 0.0 {
        return domain("hydrodynamic coefficients are undefined at y = 0");
    }
    if !(k_tilde > 0.0) {
        return domain(format!("dimensionless wave number must be positive, got {k_tilde}"));
    }
    Ok(ReflectionPair {
        r_tm: k_tilde * y / (k_tilde * y + zeta * zeta),
        r_te: -k_tilde / (k_tilde + y),
    })
}

/// Coefficients from the two polarization-tensor components:
///
/// ```text
/// r_TM = y Pi00 / (y Pi00 + 2 (y^2 - zeta^2))
/// r_TE = -[(y^2 - zeta^2) Pitr - y^2 Pi00] / [(y^2 - zeta^2)(Pitr + 2y) - y^2 Pi00]
/// ```
///
/// At `y = zeta` both reduce to the ideal-metal values whenever `Pi00 != 0`.
/// With `Pi00 = 0` there the forms are `0/0` and [`Error::Indeterminate`] is
/// returned, unless `Pitr` vanishes too (a transparent sheet).
pub fn dirac_coefficients(zeta: f64, y: f64, pi00: f64, pitr: f64) -> Result<ReflectionPair> {
    check_cone(zeta, y)?;
    if pi00 == 0.0 && pitr == 0.0 {
        return Ok(ReflectionPair::TRANSPARENT);
    }
    if y == zeta {
        if pi00 == 0.0 {
            return Err(Error::Indeterminate { zeta });
        }
        return Ok(ReflectionPair::IDEAL_METAL);
    }
    let d = (y - zeta) * (y + zeta);
    let tm = y * pi00;
    let te_num = d * pitr - y * y * pi00;
    Ok(ReflectionPair {
        r_tm: tm / (tm + 2.0 * d),
        r_te: -te_num / (te_num + 2.0 * y * d),
    })
}

/// `T = 0` coefficients via `Phi00`; determinate at `y = zeta`.
pub fn dirac_zero_t_coefficients(zeta: f64, y: f64, op: &DiracOperator) -> Result<ReflectionPair> {
    check_cone(zeta, y)?;
    let f = op.f(zeta, y);
    if !(f > 0.0) {
        return domain("zero-temperature coefficients need f > 0 (y > 0)");
    }
    let a_phi = op.alpha * phi00(zeta, y, op.delta_tilde, op.vf_ratio)?;
    Ok(ReflectionPair {
        r_tm: a_phi * y / (a_phi * y + 2.0 * f),
        r_te: -a_phi / (a_phi + 2.0 * y),
    })
}

/// Coefficients with the finite-temperature operator, plus the propagated
/// quadrature error on each.
///
/// The lower endpoint `y = zeta_l` returns the ideal-metal values directly.
pub fn dirac_finite_t_coefficients(
    point: &MatsubaraPoint,
    y: f64,
    op: &DiracOperator,
    spec: &QuadratureSpec,
) -> Result<(ReflectionPair, [f64; 2])> {
    check_cone(point.zeta, y)?;
    if y == point.zeta {
        return Ok((ReflectionPair::IDEAL_METAL, [0.0; 2]));
    }
    let p = polarization_finite_t(point, y, op, spec)?;
    let pair = dirac_coefficients(point.zeta, y, p.pi00, p.pitr)?;

    // First-order sensitivity of each coefficient to the Pi errors.
    let d = (y - point.zeta) * (y + point.zeta);
    let tm_den = y * p.pi00 + 2.0 * d;
    let dtm = 2.0 * d * y / (tm_den * tm_den) * p.error[0];
    let te_den = d * p.pitr - y * y * p.pi00 + 2.0 * y * d;
    let scale = 2.0 * y * d / (te_den * te_den);
    let dte = scale * (d * p.error[1] + y * y * p.error[0]);
    Ok((pair, [dtm.abs(), dte.abs()]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::response::DEFAULT_VF_RATIO;
    use crate::units::Geometry;
    use proptest::prelude::*;

    const VF: f64 = DEFAULT_VF_RATIO;

    #[test]
    fn hydro_static_row_is_fully_reflecting_for_tm() {
        for y in [1e-6, 0.3, 4.0, 60.0] {
            let p = hydro_coefficients(0.0, y, 0.405).unwrap();
            assert_eq!(p.r_tm, 1.0);
            assert_eq!(p.r_te, -0.405 / (0.405 + y));
        }
        assert!(hydro_coefficients(0.0, 0.0, 0.405).is_err());
        assert!(hydro_coefficients(1.0, 0.5, 0.405).is_err());
    }

    #[test]
    fn hydro_ideal_metal_limit() {
        let p = hydro_coefficients(0.7, 1.3, 1e15).unwrap();
        assert!((p.r_tm - 1.0).abs() < 1e-14 && (p.r_te + 1.0).abs() < 1e-14);
    }

    #[test]
    fn hydro_first_matsubara_oracle() {
        // a = 300 nm, T = 300 K, l = 1, y = 1, recomputed from raw constants.
        let zeta1 = 4.0 * std::f64::consts::PI * 3e-7 * 1.380_649e-23 * 300.0 / (1.054_571_817e-34 * 299_792_458.0);
        let kt = 2.0 * 3e-7 * 6.75e5;
        assert!((kt - 0.405_f64).abs() < 1e-15);
        let geom = Geometry::new(3e-7, 300.0).unwrap();
        let p = hydro_coefficients(geom.matsubara_zeta(1), 1.0, geom.dimensionless_wavenumber(DEFAULT_WAVENUMBER)).unwrap();
        assert!((p.r_tm - 0.405 / (0.405 + zeta1 * zeta1)).abs() < 1e-14);
        assert!((p.r_te + 0.405 / 1.405).abs() < 1e-15);
    }

    #[test]
    fn dirac_special_values() {
        assert_eq!(dirac_coefficients(0.5, 0.5, 0.3, 1.0).unwrap(), ReflectionPair::IDEAL_METAL);
        assert_eq!(dirac_coefficients(0.5, 0.9, 0.0, 0.0).unwrap(), ReflectionPair::TRANSPARENT);
        assert!(matches!(
            dirac_coefficients(0.5, 0.5, 0.0, 1.0),
            Err(Error::Indeterminate { .. })
        ));
    }

    #[test]
    fn zero_t_form_agrees_with_general_form() {
        let op = DiracOperator::dimensionless(0.02, VF);
        for (z, y) in [(0.0, 0.4), (0.3, 0.31), (1.0, 5.0)] {
            let p = crate::response::polarization_zero_t(z, y, &op).unwrap();
            let general = dirac_coefficients(z, y, p.pi00, p.pitr).unwrap();
            let direct = dirac_zero_t_coefficients(z, y, &op).unwrap();
            assert!((general.r_tm - direct.r_tm).abs() < 1e-13);
            assert!((general.r_te - direct.r_te).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_t_limits() {
        let big = DiracOperator::dimensionless(1e9, VF);
        let p = dirac_zero_t_coefficients(0.4, 1.0, &big).unwrap();
        assert!(p.r_tm.abs() < 1e-9 && p.r_te.abs() < 1e-9);
        let uncoupled = DiracOperator { alpha: 0.0, ..DiracOperator::dimensionless(0.0, VF) };
        assert_eq!(dirac_zero_t_coefficients(0.4, 1.0, &uncoupled).unwrap().r_tm, 0.0);
    }

    #[test]
    fn lower_endpoint_is_ideal_metal_at_finite_temperature() {
        let spec = QuadratureSpec::default();
        let op = DiracOperator::dimensionless(0.0, VF);
        for l in [1, 2, 5, 10] {
            let point = MatsubaraPoint::new(l, 0.147).unwrap();
            let (pair, _) = dirac_finite_t_coefficients(&point, point.zeta, &op, &spec).unwrap();
            assert!((pair.r_tm - 1.0).abs() <= 1e-10 && (pair.r_te + 1.0).abs() <= 1e-10);
            let zero_t = dirac_zero_t_coefficients(point.zeta, point.zeta, &op).unwrap();
            assert!((zero_t.r_tm - 1.0).abs() > 0.01);
        }
    }

    #[test]
    fn first_matsubara_term_near_300_nm() {
        let geom = Geometry::new(3e-7, 300.0).unwrap();
        let point = MatsubaraPoint::new(1, geom.dimensionless_temperature()).unwrap();
        assert!((point.zeta - 0.49).abs() < 0.01);
        let op = DiracOperator::dimensionless(0.0, VF);
        let spec = QuadratureSpec::default();
        let mut max_dev: f64 = 0.0;
        let mut prev_ratio = f64::INFINITY;
        for dy in [1e-6, 1e-4, 1e-2, 0.05, 0.1, 0.3, 1.0, 3.0, 10.0] {
            let y = point.zeta + dy;
            let (finite, _) = dirac_finite_t_coefficients(&point, y, &op, &spec).unwrap();
            let zero = dirac_zero_t_coefficients(point.zeta, y, &op).unwrap();
            // TE is comparable to TM only close to the light cone
            let ratio = finite.r_te.abs() / finite.r_tm;
            assert!(ratio < prev_ratio);
            prev_ratio = ratio;
            if dy >= 3.0 {
                assert!(ratio < 0.1, "{dy}: {ratio}");
            }
            assert!((finite.r_te - zero.r_te).abs() < 0.05 * zero.r_te.abs());
            max_dev = max_dev.max((finite.r_tm - zero.r_tm).abs() / zero.r_tm);
        }
        assert!(max_dev > 0.02 && max_dev < 0.05, "{max_dev}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn coefficients_are_bounded(
            l in 0usize..6, tau in 0.01f64..3.0, dy in 1e-6f64..20.0, dt in 0.0f64..2.0, kt in 1e-3f64..100.0,
        ) {
            let point = MatsubaraPoint::new(l, tau).unwrap();
            let y = point.zeta + dy;
            let op = DiracOperator::dimensionless(dt, VF);
            let pairs = [
                hydro_coefficients(point.zeta, y, kt).unwrap(),
                dirac_zero_t_coefficients(point.zeta, y, &op).unwrap(),
                dirac_finite_t_coefficients(&point, y, &op, &QuadratureSpec::default()).unwrap().0,
            ];
            for p in pairs {
                prop_assert!((0.0..=1.0).contains(&p.r_tm), "{:?}", p);
                prop_assert!((-1.0..=0.0).contains(&p.r_te), "{:?}", p);
            }
        }
    }
}
