//! The circle-averaged exponential `F(y) = ∫_{|ω|=1} e^{y·ω} dσ` on the
//! plane, which satisfies `ΔF = F` and `0 ≤ F ≤ C r^{−1/2} e^r`.
//!
//! `F(y) = 2π I₀(r)` and `∇F(y) = 2π I₁(r) y/r`. Three independent
//! evaluations are provided: trapezoidal quadrature in the angle, the power
//! series and a Chebyshev expansion of the scaled Bessel functions.

use std::f64::consts::{PI, TAU};
use std::fmt::Debug;
use std::io::Write;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::euler2d::{bump, Background};

/// Largest radius accepted: `e^r` stays finite in double precision.
pub const R_MAX: f64 = 700.0;

fn check_radius(r: f64) -> Result<()> {
    if !(r >= 0.0 && r <= R_MAX) {
        return Err(Error::Range(format!("radius {r} outside [0, {R_MAX}]")));
    }
    Ok(())
}

// Chebyshev coefficients of e^{-x} I0(x), e^{-x} I1(x)/x on [0, 8] and of
// √x e^{-x} I0(x), √x e^{-x} I1(x) in 32/x − 2 beyond.
const I0_A: [f64; 30] = [
    -4.415_341_646_479_339_5E-18,
    3.330_794_518_822_238_4E-17,
    -2.431_279_846_547_955E-16,
    1.715_391_285_555_133E-15,
    -1.168_533_287_799_345_1E-14,
    7.676_185_498_604_936E-14,
    -4.856_446_783_111_929E-13,
    2.955_052_663_129_64E-12,
    -1.726_826_291_441_556E-11,
    9.675_809_035_373_237E-11,
    -5.189_795_601_635_263E-10,
    2.659_823_724_682_386_6E-9,
    -1.300_025_009_986_248E-8,
    6.046_995_022_541_919E-8,
    -2.670_793_853_940_612E-7,
    1.117_387_539_120_103_7E-6,
    -4.416_738_358_458_750_5E-6,
    1.644_844_807_072_889_6E-5,
    -5.754_195_010_082_104E-5,
    1.885_028_850_958_416_5E-4,
    -5.763_755_745_385_824E-4,
    1.639_475_616_941_335_7E-3,
    -4.324_309_995_050_576E-3,
    1.054_646_039_459_499_8E-2,
    -2.373_741_480_589_947E-2,
    4.930_528_423_967_071E-2,
    -9.490_109_704_804_764E-2,
    1.716_209_015_222_087_7E-1,
    -3.046_826_723_431_984E-1,
    6.767_952_744_094_761E-1,
];

const I0_B: [f64; 25] = [
    -7.233_180_487_874_754E-18,
    -4.830_504_485_944_182E-18,
    4.465_621_420_296_76E-17,
    3.461_222_867_697_461E-17,
    -2.827_623_980_516_583_6E-16,
    -3.425_485_619_677_219E-16,
    1.772_560_133_056_526_3E-15,
    3.811_680_669_352_622_4E-15,
    -9.554_846_698_828_307E-15,
    -4.150_569_347_287_222E-14,
    1.540_086_217_521_41E-14,
    3.852_778_382_742_142_6E-13,
    7.180_124_451_383_666E-13,
    -1.794_178_531_506_806_2E-12,
    -1.321_581_184_044_771_3E-11,
    -3.149_916_527_963_241_6E-11,
    1.188_914_710_784_643_9E-11,
    4.940_602_388_224_97E-10,
    3.396_232_025_708_386_5E-9,
    2.266_668_990_498_178E-8,
    2.048_918_589_469_063_8E-7,
    2.891_370_520_834_756_7E-6,
    6.889_758_346_916_825E-5,
    3.369_116_478_255_694_3E-3,
    8.044_904_110_141_088E-1,
];

const I1_A: [f64; 29] = [
    2.777_914_112_761_046_4E-18,
    -2.111_421_214_358_166E-17,
    1.553_631_957_736_200_5E-16,
    -1.105_596_947_735_386_2E-15,
    7.600_684_294_735_408E-15,
    -5.042_185_504_727_912E-14,
    3.223_793_365_945_575E-13,
    -1.983_974_397_764_943_6E-12,
    1.173_618_629_889_090_1E-11,
    -6.663_489_723_502_027E-11,
    3.625_590_281_552_117E-10,
    -1.887_249_751_722_829_4E-9,
    9.381_537_386_495_773E-9,
    -4.445_059_128_796_328E-8,
    2.003_294_753_552_135_3E-7,
    -8.568_720_264_695_455E-7,
    3.470_251_308_137_678_5E-6,
    -1.327_316_365_603_943_6E-5,
    4.781_565_107_550_054E-5,
    -1.617_608_158_258_967_4E-4,
    5.122_859_561_685_758E-4,
    -1.513_572_450_631_253_2E-3,
    4.156_422_944_312_888E-3,
    -1.056_408_489_462_619_7E-2,
    2.472_644_903_062_651_6E-2,
    -5.294_598_120_809_499E-2,
    1.026_436_586_898_471E-1,
    -1.764_165_183_578_340_6E-1,
    2.525_871_864_436_336_5E-1,
];

const I1_B: [f64; 25] = [
    7.517_296_310_842_104_8E-18,
    4.414_348_323_071_708E-18,
    -4.650_305_368_489_358E-17,
    -3.209_525_921_993_424E-17,
    2.962_628_997_645_950_1E-16,
    3.308_202_310_920_928_3E-16,
    -1.880_354_775_510_782_4E-15,
    -3.814_403_072_437_007_8E-15,
    1.042_027_698_412_880_3E-14,
    4.272_440_016_711_951_4E-14,
    -2.101_541_842_772_664_3E-14,
    -4.083_551_111_092_197_3E-13,
    -7.198_551_776_245_908E-13,
    2.035_628_544_147_089_6E-12,
    1.412_580_743_661_378_1E-11,
    3.252_603_583_015_488_4E-11,
    -1.897_495_812_350_541_2E-11,
    -5.589_743_462_196_584E-10,
    -3.835_380_385_964_237E-9,
    -2.631_468_846_889_519_5E-8,
    -2.512_236_237_870_208_9E-7,
    -3.882_564_808_877_690_4E-6,
    -1.105_889_387_626_237_2E-4,
    -9.761_097_491_361_468E-3,
    7.785_762_350_182_801E-1,
];

fn chbevl(x: f64, coeffs: &[f64]) -> f64 {
    let mut b0 = coeffs[0];
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in &coeffs[1..] {
        b2 = b1;
        b1 = b0;
        b0 = x.mul_add(b1, c) - b2;
    }
    0.5 * (b0 - b2)
}

/// `e^{−r} I₀(r)` for `r ≥ 0`.
fn i0e(r: f64) -> f64 {
    if r <= 8.0 {
        chbevl(r.mul_add(0.5, -2.0), &I0_A)
    } else {
        chbevl(32.0 / r - 2.0, &I0_B) / r.sqrt()
    }
}

/// `e^{−r} I₁(r)` for `r ≥ 0`.
fn i1e(r: f64) -> f64 {
    if r <= 8.0 {
        chbevl(r.mul_add(0.5, -2.0), &I1_A) * r
    } else {
        chbevl(32.0 / r - 2.0, &I1_B) / r.sqrt()
    }
}

/// `F(r)` via the Chebyshev form of `2π I₀(r)`.
pub fn eval_f(r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(TAU * i0e(r) * r.exp())
}

/// `F′(r) = 2π I₁(r)`.
pub fn eval_df(r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(TAU * i1e(r) * r.exp())
}

/// `∇F(y) = F′(r) y/r`, zero at the origin.
pub fn eval_grad_f(y: [f64; 2]) -> Result<[f64; 2]> {
    let r = y[0].hypot(y[1]);
    let d = eval_df(r)?;
    if r == 0.0 {
        return Ok([0.0, 0.0]);
    }
    Ok([d * y[0] / r, d * y[1] / r])
}

/// Radius grid with `F`, `F′` and the relative residual of `ΔF = F`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub f: Vec<f64>,
    pub df: Vec<f64>,
    pub residual: Vec<f64>,
}

const PROFILE_R_MAX: f64 = 30.0;
const PROFILE_POINTS: usize = 300;
const PROFILE_H: f64 = 1e-3;

/// Evaluation settings for the quadrature and series forms, plus a lazily
/// built radial profile.
#[derive(Debug)]
pub struct TestFunction {
    /// Trapezoid nodes on the unit circle.
    pub nodes: usize,
    /// Maximum number of series terms.
    pub series_terms: usize,
    profile: OnceLock<RadialProfile>,
}

impl Default for TestFunction {
    fn default() -> Self {
        Self::new(512, 2000)
    }
}

impl TestFunction {
    pub fn new(nodes: usize, series_terms: usize) -> Self {
        Self {
            nodes: nodes.max(8),
            series_terms: series_terms.max(1),
            profile: OnceLock::new(),
        }
    }

    /// Trapezoid of `∫ e^{r cos θ} dθ` and `∫ cos θ e^{r cos θ} dθ`.
    pub fn quadrature(&self, r: f64) -> Result<(f64, f64)> {
        check_radius(r)?;
        let n = self.nodes;
        let (mut f, mut df) = (0.0, 0.0);
        for k in 0..n {
            let c = (TAU * k as f64 / n as f64).cos();
            let e = (r * (c - 1.0)).exp();
            f += e;
            df += c * e;
        }
        let scale = TAU / n as f64 * r.exp();
        Ok((f * scale, df * scale))
    }

    /// `2π Σ (r²/4)^k/(k!)²` and `2π Σ (r/2)^{2k+1}/(k!(k+1)!)`.
    pub fn series(&self, r: f64) -> Result<(f64, f64)> {
        check_radius(r)?;
        let q = 0.25 * r * r;
        let (mut t0, mut t1) = (1.0, 0.5 * r);
        let (mut s0, mut s1) = (t0, t1);
        for k in 1..=self.series_terms {
            let kf = k as f64;
            t0 *= q / (kf * kf);
            t1 *= q / (kf * (kf + 1.0));
            s0 += t0;
            s1 += t1;
            if t0 <= 1e-17 * s0 && t1 <= 1e-17 * s1 {
                return Ok((TAU * s0, TAU * s1));
            }
        }
        Err(Error::Convergence {
            tol: 1e-17,
            iterations: self.series_terms,
            lo: r,
            hi: r,
        })
    }

    /// Chebyshev form, `(F, F′)`.
    pub fn bessel(&self, r: f64) -> Result<(f64, f64)> {
        Ok((eval_f(r)?, eval_df(r)?))
    }

    /// Profile on `[0, 30]`, built on first use.
    pub fn profile(&self) -> &RadialProfile {
        self.profile.get_or_init(|| {
            let mut p = RadialProfile {
                r: Vec::with_capacity(PROFILE_POINTS + 1),
                f: Vec::with_capacity(PROFILE_POINTS + 1),
                df: Vec::with_capacity(PROFILE_POINTS + 1),
                residual: Vec::with_capacity(PROFILE_POINTS + 1),
            };
            for k in 0..=PROFILE_POINTS {
                let r = PROFILE_R_MAX * k as f64 / PROFILE_POINTS as f64;
                p.r.push(r);
                p.f.push(eval_f(r).expect("profile radius in range"));
                p.df.push(eval_df(r).expect("profile radius in range"));
                p.residual
                    .push(laplacian_residual(r, PROFILE_H).expect("profile radius in range"));
            }
            p
        })
    }

    pub fn write_profile_csv(&self, path: &Path) -> Result<()> {
        let p = self.profile();
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "r,F,F',residual")?;
        for k in 0..p.r.len() {
            writeln!(w, "{},{},{},{}", p.r[k], p.f[k], p.df[k], p.residual[k])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `|F″ + F′/r − F| / F` by centred differences; at `r = 0` the limit form
/// `|2F″(0) − F(0)| / F(0)`.
pub fn laplacian_residual(r: f64, h: f64) -> Result<f64> {
    let f0 = eval_f(r)?;
    if r == 0.0 {
        let d2 = 2.0 * (eval_f(h)? - f0) / (h * h);
        return Ok((2.0 * d2 - f0).abs() / f0);
    }
    let (fp, fm) = (eval_f(r + h)?, eval_f((r - h).abs())?);
    let d2 = (fp - 2.0 * f0 + fm) / (h * h);
    let d1 = (fp - fm) / (2.0 * h);
    Ok((d2 + d1 / r - f0).abs() / f0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeReport {
    pub h: f64,
    /// Max relative residual over `(0, r_max]`.
    pub max_residual: f64,
    pub origin_residual: f64,
    /// Same quantities at `h/2`.
    pub max_residual_half: f64,
    pub origin_residual_half: f64,
    pub order: f64,
    pub origin_order: f64,
}

const PDE_POINTS: usize = 200;

pub fn verify_pde_identity(r_max: f64, h: f64) -> Result<PdeReport> {
    check_radius(r_max + h)?;
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Validation(format!(
            "step must lie in (0, 1), got {h}"
        )));
    }
    let max_over = |h: f64| -> Result<f64> {
        let mut worst = 0.0_f64;
        for k in 1..=PDE_POINTS {
            let r = r_max * k as f64 / PDE_POINTS as f64;
            worst = worst.max(laplacian_residual(r, h)?);
        }
        Ok(worst)
    };
    let (m1, m2) = (max_over(h)?, max_over(0.5 * h)?);
    let (o1, o2) = (
        laplacian_residual(0.0, h)?,
        laplacian_residual(0.0, 0.5 * h)?,
    );
    Ok(PdeReport {
        h,
        max_residual: m1,
        origin_residual: o1,
        max_residual_half: m2,
        origin_residual_half: o2,
        order: (m1 / m2).log2(),
        origin_order: (o1 / o2).log2(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthReport {
    /// `sup F r^{1/2} e^{−r}` over the grid and where it is attained.
    pub sup: f64,
    pub sup_at: f64,
    /// Same sup over the first half of the range.
    pub sup_half_range: f64,
    /// `F r^{1/2} e^{−r}` at `r_max`; tends to `√(2π)`.
    pub tail: f64,
    pub nonnegative: bool,
}

impl GrowthReport {
    pub fn stable(&self) -> bool {
        self.sup.is_finite() && (self.sup - self.sup_half_range).abs() <= 1e-9 * self.sup
    }
}

const GROWTH_POINTS: usize = 400;

/// Scans `F r^{1/2} e^{−r}` on a log-spaced grid over `[10⁻³, r_max]`.
pub fn verify_growth_bound(r_max: f64) -> Result<GrowthReport> {
    check_radius(r_max)?;
    if r_max <= 2e-3 {
        return Err(Error::Validation(format!(
            "r_max must exceed 2e-3, got {r_max}"
        )));
    }
    let scaled = |r: f64| TAU * i0e(r) * r.sqrt();
    let (lo, hi) = (1e-3_f64.ln(), r_max.ln());
    let mut rep = GrowthReport {
        sup: 0.0,
        sup_at: 0.0,
        sup_half_range: 0.0,
        tail: scaled(r_max),
        nonnegative: true,
    };
    for k in 0..=GROWTH_POINTS {
        let r = (lo + (hi - lo) * k as f64 / GROWTH_POINTS as f64).exp();
        let v = scaled(r);
        rep.nonnegative &= eval_f(r)? >= 0.0;
        if v > rep.sup {
            rep.sup = v;
            rep.sup_at = r;
        }
        if r <= 0.5 * r_max {
            rep.sup_half_range = rep.sup_half_range.max(v);
        }
    }
    Ok(rep)
}

/// The 0-sphere `{ω = ±1}` analogues of `F` and `F′`:
/// `(Σ e^{yω}, Σ ω e^{yω})`.
pub fn sphere0_weights(y: f64) -> (f64, f64) {
    [-1.0_f64, 1.0].iter().fold((0.0, 0.0), |(f, g), &w| {
        (f + (y * w).exp(), g + w * (y * w).exp())
    })
}

/// Perturbation of the plane shock in three space dimensions: interface
/// `Π(y₁, y₂)` and fields `ρ₀`, `u₀`, `v₀ = (v₀₁, v₀₂)` of `(x, y₁, y₂)`.
pub trait PerturbationFields3D: Debug + Send + Sync {
    fn interface(&self, y1: f64, y2: f64) -> f64;
    fn rho0(&self, x: f64, y1: f64, y2: f64) -> f64;
    fn u0(&self, x: f64, y1: f64, y2: f64) -> f64;
    fn v0(&self, x: f64, y1: f64, y2: f64) -> [f64; 2];
}

/// `ρ₀ = aψ`, `u₀ = 0`, `v₀ = b ψ (y₁, y₂)`, `Π = A ψ(|y|)` with
/// `ψ = (1 − R²)⁴` on the unit ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefaultFamily3D {
    pub a: f64,
    pub b: f64,
    pub pi_amplitude: f64,
}

impl Default for DefaultFamily3D {
    fn default() -> Self {
        Self {
            a: 0.5,
            b: 1.0,
            pi_amplitude: 0.5,
        }
    }
}

impl PerturbationFields3D for DefaultFamily3D {
    fn interface(&self, y1: f64, y2: f64) -> f64 {
        self.pi_amplitude * bump(y1 * y1 + y2 * y2)
    }

    fn rho0(&self, x: f64, y1: f64, y2: f64) -> f64 {
        self.a * bump(x * x + y1 * y1 + y2 * y2)
    }

    fn u0(&self, _x: f64, _y1: f64, _y2: f64) -> f64 {
        0.0
    }

    fn v0(&self, x: f64, y1: f64, y2: f64) -> [f64; 2] {
        let s = self.b * bump(x * x + y1 * y1 + y2 * y2);
        [s * y1, s * y2]
    }
}

#[derive(Debug, Clone)]
pub struct ThreeDInitialData {
    pub epsilon: f64,
    pub background: Background,
    pub fields: Arc<dyn PerturbationFields3D>,
}

impl ThreeDInitialData {
    pub fn new(
        epsilon: f64,
        background: Background,
        fields: Arc<dyn PerturbationFields3D>,
    ) -> Result<Self> {
        let d = Self {
            epsilon,
            background,
            fields,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn symmetric_default(epsilon: f64) -> Result<Self> {
        Self::new(
            epsilon,
            Background::symmetric(),
            Arc::new(DefaultFamily3D::default()),
        )
    }

    /// Probes the supports on spheres and circles just outside radius 1.
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Validation(format!(
                "epsilon must be finite and nonnegative, got {}",
                self.epsilon
            )));
        }
        let f = &self.fields;
        let golden = PI * (3.0 - 5.0_f64.sqrt());
        for &gap in &[1e-9, 1e-3, 0.05, 0.3, 1.0, 5.0] {
            let r = 1.0 + gap;
            for k in 0..256 {
                let th = TAU * k as f64 / 256.0;
                let pi = f.interface(r * th.cos(), r * th.sin());
                if pi != 0.0 {
                    return Err(Error::Validation(format!(
                        "interface profile is {pi} at |y| = {r}, outside the unit disk"
                    )));
                }
            }
            for k in 0..512 {
                let z = 1.0 - 2.0 * (k as f64 + 0.5) / 512.0;
                let s = (1.0 - z * z).sqrt();
                let th = golden * k as f64;
                let (x, y1, y2) = (r * z, r * s * th.cos(), r * s * th.sin());
                let v = f.v0(x, y1, y2);
                for (name, value) in [
                    ("rho0", f.rho0(x, y1, y2)),
                    ("u0", f.u0(x, y1, y2)),
                    ("v0", v[0].abs() + v[1].abs()),
                ] {
                    if value != 0.0 {
                        return Err(Error::Validation(format!(
                            "{name} is {value} at ({x:.4}, {y1:.4}, {y2:.4}), outside the unit ball"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Values of the two 3-D sign hypotheses on the initial data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeDReport {
    /// `∫F ∫ρ₀ dx dy + (ρ_l − ρ_r)∫F Π dy`, required `≥ 0`.
    pub x0: f64,
    /// `∫∫(ρ_side + ερ₀) ∇F·v₀ dx dy`, required `> 0`.
    pub y0: f64,
}

impl ThreeDReport {
    pub fn holds(&self) -> bool {
        self.x0 >= 0.0 && self.y0 > 0.0
    }
}

/// Midpoint rule on `[−1, 1]³` with `cells` cells per direction; the
/// `ω`-integrals are carried out exactly through `F` and `∇F`.
pub fn three_d_initial_functionals(data: &ThreeDInitialData, cells: usize) -> Result<ThreeDReport> {
    data.validate()?;
    if cells < 2 {
        return Err(Error::Validation(format!(
            "need at least 2 cells per direction, got {cells}"
        )));
    }
    let h = 2.0 / cells as f64;
    let c = |k: usize| -1.0 + (k as f64 + 0.5) * h;
    let f = &data.fields;
    let e = data.epsilon;
    let (rho_l, rho_r) = (data.background.left().rho, data.background.right().rho);
    let (mut x0, mut y0) = (0.0, 0.0);
    for j2 in 0..cells {
        let y2 = c(j2);
        for j1 in 0..cells {
            let y1 = c(j1);
            let weight = eval_f(y1.hypot(y2))?;
            let grad = eval_grad_f([y1, y2])?;
            let pi = f.interface(y1, y2);
            x0 += (rho_l - rho_r) * weight * pi * h * h;
            for i in 0..cells {
                let x = c(i);
                let r0 = f.rho0(x, y1, y2);
                let v = f.v0(x, y1, y2);
                let side = if x > e * pi { rho_r } else { rho_l };
                x0 += weight * r0 * h * h * h;
                y0 += (side + e * r0) * (grad[0] * v[0] + grad[1] * v[1]) * h * h * h;
            }
        }
    }
    Ok(ThreeDReport { x0, y0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn known_values() {
        assert_relative_eq!(eval_f(0.0).unwrap(), TAU, max_relative = 1e-15);
        assert_relative_eq!(
            eval_f(1.0).unwrap(),
            TAU * 1.266_065_877_752_008_4,
            max_relative = 1e-14
        );
        assert_relative_eq!(eval_f(1.0).unwrap(), 7.95493, max_relative = 1e-6);
        assert_relative_eq!(eval_f(2.0).unwrap(), 14.3231, max_relative = 1e-5);
        assert_relative_eq!(eval_df(1.0).unwrap(), 3.55100, max_relative = 1e-5);
        assert_eq!(eval_grad_f([0.0, 0.0]).unwrap(), [0.0, 0.0]);
        assert!(eval_f(701.0).is_err());
        assert!(eval_f(-1.0).is_err());
        assert!(eval_f(f64::NAN).is_err());
        assert!(eval_f(700.0).unwrap().is_finite());
    }

    #[test]
    fn fine_trapezoid_at_one() {
        let n = 10_000;
        let s: f64 = (0..n)
            .map(|k| (TAU * k as f64 / n as f64).cos().exp())
            .sum::<f64>()
            * TAU
            / n as f64;
        assert_relative_eq!(eval_f(1.0).unwrap(), s, max_relative = 1e-13);
        let g: f64 = (0..n)
            .map(|k| {
                let c = (TAU * k as f64 / n as f64).cos();
                c * c.exp()
            })
            .sum::<f64>()
            * TAU
            / n as f64;
        assert_relative_eq!(eval_df(1.0).unwrap(), g, max_relative = 1e-13);
    }

    #[test]
    fn three_forms_agree() {
        let tf = TestFunction::default();
        for k in 0..=300 {
            let r = 0.1 * k as f64;
            let (q, dq) = tf.quadrature(r).unwrap();
            let (s, ds) = tf.series(r).unwrap();
            let (b, db) = tf.bessel(r).unwrap();
            assert_relative_eq!(q, s, max_relative = 1e-10);
            assert_relative_eq!(q, b, max_relative = 1e-10);
            if r > 0.0 {
                assert_relative_eq!(dq, ds, max_relative = 1e-10);
                assert_relative_eq!(dq, db, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn laplacian_identity() {
        assert!(laplacian_residual(1.0, 1e-3).unwrap() < 1e-5);
        let rep = verify_pde_identity(5.0, 1e-2).unwrap();
        assert!((rep.order - 2.0).abs() < 0.2, "{rep:?}");
        assert!((rep.origin_order - 2.0).abs() < 0.2, "{rep:?}");
    }

    #[test]
    fn growth_tail() {
        let g = verify_growth_bound(30.0).unwrap();
        assert!((2.49..=2.52).contains(&g.tail), "{g:?}");
        assert!(g.nonnegative && g.stable());
        assert!(verify_growth_bound(800.0).is_err());
    }

    #[test]
    fn profile_csv() {
        let tf = TestFunction::default();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("testfn.csv");
        tf.write_profile_csv(&path).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("r,F,F',residual"));
        let first: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(first[0], 0.0);
        assert_relative_eq!(first[1], TAU, max_relative = 1e-15);
        assert!(tf.profile().f.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn zero_velocity_gives_zero_y0() {
        let fam = DefaultFamily3D {
            b: 0.0,
            ..Default::default()
        };
        let d = ThreeDInitialData::new(0.1, Background::symmetric(), Arc::new(fam)).unwrap();
        let rep = three_d_initial_functionals(&d, 24).unwrap();
        assert_eq!(rep.y0, 0.0);
        assert!(rep.x0 > 0.0);
    }

    #[derive(Debug)]
    struct Wide;
    impl PerturbationFields3D for Wide {
        fn interface(&self, _: f64, _: f64) -> f64 {
            0.0
        }
        fn rho0(&self, x: f64, y1: f64, y2: f64) -> f64 {
            bump((x * x + y1 * y1 + y2 * y2) / 1.5)
        }
        fn u0(&self, _: f64, _: f64, _: f64) -> f64 {
            0.0
        }
        fn v0(&self, _: f64, _: f64, _: f64) -> [f64; 2] {
            [0.0, 0.0]
        }
    }

    #[test]
    fn support_violation() {
        let err = ThreeDInitialData::new(0.1, Background::symmetric(), Arc::new(Wide)).unwrap_err();
        assert!(err.to_string().contains("rho0"));
    }
}
