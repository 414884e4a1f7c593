//! Taming forms and the deformation of a congruence to a Riemann sphere.

use super::{contract_toward, is_elliptic, LineCongruence, SAMPLE_LEVEL};
use crate::error::{Error, Result};
use crate::grassmann::TwoForm;
use crate::sphere::Vec3;
use rayon::prelude::*;

const MEAN_TOL: f64 = 1e-9;

/// Unit centre `Omega` in `S2+` of the image, weighted by area on `S2-`.
pub fn taming_form(x: &LineCongruence) -> Result<Vec3> {
    if let Some(c) = x.constant_value() {
        return Ok(c);
    }
    let (elliptic, margin) = is_elliptic(x);
    if !elliptic {
        return Err(Error::NotElliptic { margin });
    }
    let samples = x.samples(SAMPLE_LEVEL);
    let weighted: Vec<(Vec3, f64)> = samples
        .par_iter()
        .map(|smp| {
            let w = if x.is_graph_parametrized() {
                smp.weight
            } else {
                let (_, dy, _) = x.differentials(&smp.param);
                smp.weight * dy.determinant().abs()
            };
            (smp.point.x, w)
        })
        .collect();
    let mean: Vec3 = weighted.iter().map(|(p, w)| p * *w).sum();
    let total: f64 = weighted.iter().map(|(_, w)| w).sum();
    let norm = mean.norm() / total.max(f64::MIN_POSITIVE);
    if !(norm >= MEAN_TOL) {
        return Err(Error::MeanDegenerate { norm });
    }
    let mut omega = mean.normalize();
    let points: Vec<Vec3> = weighted.into_iter().map(|(p, _)| p).collect();
    // push the centre toward the worst point until the whole image is strictly on one side
    for _ in 0..200 {
        let (worst, val) = points
            .iter()
            .map(|p| (*p, omega.dot(p)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty sample set");
        if val > 1e-6 {
            return Ok(omega);
        }
        omega = (omega + worst * 0.1).normalize();
    }
    Err(Error::MeanDegenerate { norm })
}

/// The self-dual form `W1(dx12 + dx34) + W2(dx31 + dx24) + W3(dx23 + dx14)`.
pub fn taming_two_form(omega: &Vec3) -> TwoForm {
    TwoForm::self_dual(omega)
}

/// Whether `omega` is positive on every sampled plane of `x`.
pub fn is_tamed(x: &LineCongruence, omega: &TwoForm) -> bool {
    x.samples(SAMPLE_LEVEL)
        .par_iter()
        .all(|s| omega.evaluate_plucker(&s.point) > 0.0)
}

/// Contract the graph geodesically toward its taming centre by `1 - t`.
pub fn deform(x: &LineCongruence, t: f64) -> Result<LineCongruence> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Invalid(format!("deformation time {t} outside [0, 1]")));
    }
    if t == 0.0 {
        return Ok(x.clone());
    }
    let omega = taming_form(x)?;
    Ok(contract_toward(x, omega, 1.0 - t).labelled("deformed"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congruence::{riemann_sphere, ComplexStructureJ};
    use crate::grassmann::TwoPlane;

    #[test]
    fn constant_centre_and_form() {
        let x = LineCongruence::constant(Vec3::x());
        let omega = taming_form(&x).unwrap();
        assert_eq!(omega, Vec3::x());
        let form = taming_two_form(&omega);
        assert_eq!(form.0, [1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert!((form.evaluate(&TwoPlane::coordinate(0, 1)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn standard_sphere_tamed_by_kahler_form() {
        let x = riemann_sphere(&ComplexStructureJ::standard()).unwrap();
        let form = TwoForm([1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(is_tamed(&x, &form));
        assert!(!is_tamed(&x, &TwoForm([-1.0, -1.0, 0.0, 0.0, 0.0, 0.0])));
    }

    #[test]
    fn deform_endpoints() {
        let x = crate::congruence::perturbed_with(
            Vec3::x(),
            0.3,
            nalgebra::Matrix3::new(0.2, 0.5, -0.1, 0.3, 0.1, 0.4, -0.2, 0.2, 0.6),
            Vec3::new(0.1, -0.3, 0.2),
        );
        let same = deform(&x, 0.0).unwrap();
        let y = Vec3::new(0.1, 0.9, -0.3).normalize();
        assert_eq!(same.point(&y), x.point(&y));
        let end = deform(&x, 1.0).unwrap();
        let omega = taming_form(&x).unwrap();
        assert!((end.point(&y).x - omega).norm() < 1e-14);
        assert_eq!(is_elliptic(&end), (true, 1.0));
    }
}
