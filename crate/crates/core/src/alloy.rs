//! Thermophysical data of the solidifying alloy.
//!
//! Solid fraction follows the Scheil segregation rule inside the mushy zone,
//! clamped to 0 above the liquidus and to 1 below the solidus (eutectic)
//! cutoff. Mixture properties are linear in the solid fraction and the
//! latent heat is folded into a pseudo specific heat.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Constant thermophysical properties of a binary alloy (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlloyProperties<T> {
    /// Solid thermal conductivity, W/(m K).
    pub k_s: T,
    /// Liquid thermal conductivity, W/(m K).
    pub k_l: T,
    /// Solid specific heat, J/(kg K).
    pub c_s: T,
    /// Liquid specific heat, J/(kg K).
    pub c_l: T,
    /// Solid density, kg/m^3.
    pub rho_s: T,
    /// Liquid density, kg/m^3.
    pub rho_l: T,
    /// Latent heat of fusion, J/kg.
    pub latent_heat: T,
    /// Melting temperature of the pure solvent, K.
    pub t_f: T,
    /// Liquidus temperature, K.
    pub t_liq: T,
    /// Solidus (eutectic) cutoff, K.
    pub t_sol: T,
    /// Partition coefficient.
    pub k0: T,
}

/// Effective properties at one temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveProperties<T> {
    /// Pseudo specific heat `c_m - L dfs/dT`, J/(kg K).
    pub cp: T,
    /// Conductivity, W/(m K).
    pub k: T,
    /// Density, kg/m^3.
    pub rho: T,
}

impl<T: Scalar> AlloyProperties<T> {
    /// Representative Al-7wt.%Si data set. These values are typical handbook
    /// magnitudes for a hypoeutectic Al-Si alloy and are not calibrated
    /// against any particular experiment.
    pub fn al_7si() -> Self {
        Self {
            k_s: T::lit(150.0),
            k_l: T::lit(70.0),
            c_s: T::lit(900.0),
            c_l: T::lit(1100.0),
            rho_s: T::lit(2550.0),
            rho_l: T::lit(2400.0),
            latent_heat: T::lit(4.0e5),
            t_f: T::lit(933.0),
            t_liq: T::lit(890.0),
            t_sol: T::lit(850.0),
            k0: T::lit(0.13),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("k_s", self.k_s),
            ("k_l", self.k_l),
            ("c_s", self.c_s),
            ("c_l", self.c_l),
            ("rho_s", self.rho_s),
            ("rho_l", self.rho_l),
            ("latent_heat", self.latent_heat),
            ("t_f", self.t_f),
            ("t_liq", self.t_liq),
            ("t_sol", self.t_sol),
            ("k0", self.k0),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::invalid("alloy", format!("{name} is not finite")));
            }
            if v <= T::zero() {
                return Err(Error::invalid(
                    "alloy",
                    format!("{name} must be positive, got {v}"),
                ));
            }
        }
        if !(self.t_sol < self.t_liq && self.t_liq < self.t_f) {
            return Err(Error::invalid(
                "alloy",
                format!(
                    "require t_sol < t_liq < t_f, got {} / {} / {}",
                    self.t_sol, self.t_liq, self.t_f
                ),
            ));
        }
        if self.k0 >= T::one() {
            return Err(Error::invalid(
                "alloy",
                format!("k0 must lie in (0, 1), got {}", self.k0),
            ));
        }
        Ok(())
    }

    #[inline]
    fn scheil_exponent(&self) -> T {
        T::one() / (self.k0 - T::one())
    }

    /// Solid fraction at temperature `t` (K).
    pub fn solid_fraction(&self, t: T) -> Result<T> {
        if !t.is_finite() {
            return Err(Error::NonFinite("temperature"));
        }
        Ok(self.solid_fraction_unchecked(t))
    }

    /// dfs/dT at temperature `t` (1/K); zero outside the open mushy interval.
    pub fn dfs_dt(&self, t: T) -> Result<T> {
        if !t.is_finite() {
            return Err(Error::NonFinite("temperature"));
        }
        Ok(self.dfs_dt_unchecked(t))
    }

    /// Pseudo specific heat, conductivity and density at temperature `t`.
    pub fn effective_properties(&self, t: T) -> Result<EffectiveProperties<T>> {
        if !t.is_finite() {
            return Err(Error::NonFinite("temperature"));
        }
        Ok(self.effective_unchecked(t))
    }

    /// Conductivity integral `U(t) = ∫ k dT` measured from the solidus
    /// cutoff, W/m. Continuous in `t` although `k` jumps at the cutoff.
    pub fn conductivity_integral(&self, t: T) -> Result<T> {
        if !t.is_finite() {
            return Err(Error::NonFinite("temperature"));
        }
        Ok(self.conductivity_integral_unchecked(t))
    }

    pub(crate) fn conductivity_integral_unchecked(&self, t: T) -> T {
        if t <= self.t_sol {
            return self.k_s * (t - self.t_sol);
        }
        let span = self.t_f - self.t_liq;
        let q = self.scheil_exponent() + T::one();
        let x_sol = (self.t_f - self.t_sol) / span;
        // ∫_{t_sol}^{t} fs dT with fs = 1 - x^p and dx = -dT / span.
        let mushy = |t: T| {
            let x = (self.t_f - t) / span;
            let fs_int = (t - self.t_sol) - span * (x_sol.powf(q) - x.powf(q)) / q;
            self.k_l * (t - self.t_sol) + (self.k_s - self.k_l) * fs_int
        };
        if t < self.t_liq {
            mushy(t)
        } else {
            mushy(self.t_liq) + self.k_l * (t - self.t_liq)
        }
    }

    #[inline]
    pub(crate) fn solid_fraction_unchecked(&self, t: T) -> T {
        if t >= self.t_liq {
            T::zero()
        } else if t <= self.t_sol {
            T::one()
        } else {
            let x = (self.t_f - t) / (self.t_f - self.t_liq);
            T::one() - x.powf(self.scheil_exponent())
        }
    }

    #[inline]
    pub(crate) fn dfs_dt_unchecked(&self, t: T) -> T {
        if t >= self.t_liq || t <= self.t_sol {
            return T::zero();
        }
        let span = self.t_f - self.t_liq;
        let p = self.scheil_exponent();
        let x = (self.t_f - t) / span;
        p * x.powf(p - T::one()) / span
    }

    #[inline]
    pub(crate) fn effective_unchecked(&self, t: T) -> EffectiveProperties<T> {
        if t >= self.t_liq {
            return EffectiveProperties {
                cp: self.c_l,
                k: self.k_l,
                rho: self.rho_l,
            };
        }
        if t <= self.t_sol {
            return EffectiveProperties {
                cp: self.c_s,
                k: self.k_s,
                rho: self.rho_s,
            };
        }
        // Shares one powf between fs and dfs/dT.
        let span = self.t_f - self.t_liq;
        let p = self.scheil_exponent();
        let x = (self.t_f - t) / span;
        let xp = x.powf(p);
        let fs = T::one() - xp;
        let dfs = p * xp / x / span;
        let fl = T::one() - fs;
        EffectiveProperties {
            cp: fs * self.c_s + fl * self.c_l - self.latent_heat * dfs,
            k: fs * self.k_s + fl * self.k_l,
            rho: fs * self.rho_s + fl * self.rho_l,
        }
    }
}

impl<T: Scalar> Default for AlloyProperties<T> {
    fn default() -> Self {
        Self::al_7si()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn alloy() -> AlloyProperties<f64> {
        AlloyProperties::al_7si()
    }

    #[test]
    fn endpoints() {
        let a = alloy();
        assert_eq!(a.solid_fraction(a.t_liq).unwrap(), 0.0);
        assert_eq!(a.solid_fraction(a.t_sol - 10.0).unwrap(), 1.0);
        assert_eq!(a.dfs_dt(a.t_liq + 1.0).unwrap(), 0.0);
        assert_eq!(a.dfs_dt(a.t_sol - 1.0).unwrap(), 0.0);
    }

    #[test]
    fn scheil_reference_value() {
        // 1 - (53/43)^(1/(0.13-1)), evaluated independently at 30 digits.
        let fs = alloy().solid_fraction(880.0).unwrap();
        assert!((fs - 0.213_635_929_550_024).abs() < 1e-12, "{fs}");
    }

    #[test]
    fn rejects_non_finite() {
        let a = alloy();
        assert!(a.solid_fraction(f64::NAN).is_err());
        assert!(a.dfs_dt(f64::INFINITY).is_err());
        assert!(a.effective_properties(f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn pure_phase_properties() {
        let a = alloy();
        let l = a.effective_properties(a.t_liq + 5.0).unwrap();
        assert_eq!((l.cp, l.k, l.rho), (a.c_l, a.k_l, a.rho_l));
        let s = a.effective_properties(a.t_sol).unwrap();
        assert_eq!((s.cp, s.k, s.rho), (a.c_s, a.k_s, a.rho_s));
    }

    #[test]
    fn mushy_mixture_by_hand() {
        let a = alloy();
        let t = 870.0;
        let fs = a.solid_fraction(t).unwrap();
        let e = a.effective_properties(t).unwrap();
        let k = a.k_l + fs * (a.k_s - a.k_l);
        let rho = a.rho_l + fs * (a.rho_s - a.rho_l);
        let cm = a.c_l + fs * (a.c_s - a.c_l);
        assert!((e.k - k).abs() < 1e-10);
        assert!((e.rho - rho).abs() < 1e-9);
        assert!((e.cp - (cm - a.latent_heat * a.dfs_dt(t).unwrap())).abs() < 1e-8);
        assert!(e.cp > cm);
    }

    #[test]
    fn conductivity_integral_is_continuous() {
        let a = alloy();
        let u = |t: f64| a.conductivity_integral(t).unwrap();
        assert_eq!(u(a.t_sol), 0.0);
        for edge in [a.t_sol, a.t_liq] {
            assert!((u(edge + 1e-9) - u(edge - 1e-9)).abs() < 1e-6);
        }
        // Solid-side slope is k_s, liquid-side slope is k_l.
        assert!((u(a.t_sol - 10.0) + 10.0 * a.k_s).abs() < 1e-9);
        assert!((u(a.t_liq + 10.0) - u(a.t_liq) - 10.0 * a.k_l).abs() < 1e-9);
        assert!(a.conductivity_integral(f64::NAN).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let a = AlloyProperties::<f32>::al_7si();
        let fs = a.solid_fraction(880.0).unwrap();
        assert!((fs - 0.213_636).abs() < 1e-4);
    }

    #[test]
    fn validation() {
        let mut a = alloy();
        assert!(a.validate().is_ok());
        a.k0 = 1.2;
        assert!(a.validate().is_err());
        let mut a = alloy();
        a.t_sol = 895.0;
        assert!(a.validate().is_err());
        let mut a = alloy();
        a.latent_heat = 0.0;
        assert!(a.validate().is_err());
    }

    proptest! {
        #[test]
        fn fs_monotone(t1 in 700.0..1000.0f64, t2 in 700.0..1000.0f64) {
            let a = alloy();
            let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            prop_assert!(a.solid_fraction(lo).unwrap() >= a.solid_fraction(hi).unwrap());
        }

        #[test]
        fn derivative_matches_central_difference(t in 851.0..889.0f64) {
            let a = alloy();
            let h = 1e-4;
            let fd = (a.solid_fraction(t + h).unwrap() - a.solid_fraction(t - h).unwrap()) / (2.0 * h);
            let an = a.dfs_dt(t).unwrap();
            prop_assert!(an <= 0.0);
            prop_assert!(((an - fd) / an).abs() < 1e-6, "analytic {} fd {}", an, fd);
        }

        #[test]
        fn conductivity_integral_differentiates_to_k(t in 700.0..1000.0f64) {
            let a = alloy();
            let h = 1e-3;
            let fd = (a.conductivity_integral(t + h).unwrap() - a.conductivity_integral(t - h).unwrap()) / (2.0 * h);
            let k = a.effective_properties(t).unwrap().k;
            let near_kink = (t - a.t_sol).abs() < 2.0 * h || (t - a.t_liq).abs() < 2.0 * h;
            prop_assert!(near_kink || ((fd - k) / k).abs() < 1e-6, "fd {} k {}", fd, k);
        }

        #[test]
        fn effective_bounds(t in 700.0..1000.0f64) {
            let a = alloy();
            let e = a.effective_properties(t).unwrap();
            prop_assert!(e.cp >= a.c_s.min(a.c_l));
            prop_assert!(e.k >= a.k_l.min(a.k_s) && e.k <= a.k_l.max(a.k_s));
            prop_assert!(e.rho >= a.rho_l.min(a.rho_s) && e.rho <= a.rho_l.max(a.rho_s));
        }
    }
}
