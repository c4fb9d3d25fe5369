//! Globally adaptive Gauss–Kronrod (10/21-point) integration of
//! complex-valued integrands, on real intervals and on polygonal paths in ℂ.

use num_complex::Complex64;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_745_484_826,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Stopping rule for one adaptive integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_subdivisions: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64, max_subdivisions: usize) -> Self {
        Self {
            abs,
            rel,
            max_subdivisions,
        }
    }

    fn target(&self, value: Complex64) -> f64 {
        self.abs.max(self.rel * value.norm())
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
    pub subdivisions: usize,
    pub evaluations: usize,
    pub converged: bool,
}

impl Estimate {
    fn zero() -> Self {
        Self {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            subdivisions: 0,
            evaluations: 0,
            converged: true,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.re.is_finite() && self.value.im.is_finite() && self.error.is_finite()
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: Complex64,
    error: f64,
}

fn kronrod<F>(f: &F, lo: f64, hi: f64) -> (Complex64, f64)
where
    F: Fn(f64) -> Complex64,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let f_center = f(center);
    let mut kron = f_center * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut res_abs = f_center.norm() * WGK[10];
    let mut samples = [(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 10];

    for (j, sample) in samples.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        *sample = (f1, f2);
        kron += (f1 + f2) * WGK[j];
        res_abs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }

    let mean = kron * 0.5;
    let mut res_asc = WGK[10] * (f_center - mean).norm();
    for (j, (f1, f2)) in samples.iter().enumerate() {
        res_asc += WGK[j] * ((f1 - mean).norm() + (f2 - mean).norm());
    }

    let abs_half = half.abs();
    let value = kron * half;
    let res_abs = res_abs * abs_half;
    let res_asc = res_asc * abs_half;
    let mut err = ((kron - gauss) * half).norm();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.re.is_finite() || !value.im.is_finite() {
        err = f64::INFINITY;
    }
    (value, err)
}

/// Integrate `f` over the real interval spanned by `points`, which must be
/// sorted; interior points become forced panel boundaries.
pub fn integrate<F>(f: F, points: &[f64], tol: &Tolerance) -> Estimate
where
    F: Fn(f64) -> Complex64,
{
    if points.len() < 2 {
        return Estimate::zero();
    }
    let mut panels: Vec<Panel> = Vec::with_capacity(points.len() + 16);
    for pair in points.windows(2) {
        if pair[1] == pair[0] {
            continue;
        }
        let (value, error) = kronrod(&f, pair[0], pair[1]);
        panels.push(Panel {
            lo: pair[0],
            hi: pair[1],
            value,
            error,
        });
    }
    let mut evaluations = 21 * panels.len();
    let mut subdivisions = 0;

    loop {
        let total: Complex64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let finite = total.re.is_finite() && total.im.is_finite() && error.is_finite();
        if finite && error <= tol.target(total) {
            return Estimate {
                value: total,
                error,
                subdivisions,
                evaluations,
                converged: true,
            };
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.error.total_cmp(&b.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let p = panels[worst];
        let mid = 0.5 * (p.lo + p.hi);
        let resolvable = mid > p.lo.min(p.hi) && mid < p.lo.max(p.hi);
        if subdivisions >= tol.max_subdivisions || !resolvable {
            return Estimate {
                value: total,
                error,
                subdivisions,
                evaluations,
                converged: false,
            };
        }
        let (v1, e1) = kronrod(&f, p.lo, mid);
        let (v2, e2) = kronrod(&f, mid, p.hi);
        evaluations += 42;
        subdivisions += 1;
        panels[worst] = Panel {
            lo: p.lo,
            hi: mid,
            value: v1,
            error: e1,
        };
        panels.insert(
            worst + 1,
            Panel {
                lo: mid,
                hi: p.hi,
                value: v2,
                error: e2,
            },
        );
    }
}

/// Integrate an analytic `f` along the polygon through `vertices`.
pub fn integrate_path<F>(f: F, vertices: &[Complex64], tol: &Tolerance) -> Estimate
where
    F: Fn(Complex64) -> Complex64,
{
    let mut acc = Estimate::zero();
    for seg in vertices.windows(2) {
        let (z0, z1) = (seg[0], seg[1]);
        let dz = z1 - z0;
        if dz.norm() == 0.0 {
            continue;
        }
        let est = integrate(|t| f(z0 + dz * t) * dz, &[0.0, 1.0], tol);
        acc.value += est.value;
        acc.error += est.error;
        acc.subdivisions += est.subdivisions;
        acc.evaluations += est.evaluations;
        acc.converged &= est.converged;
    }
    acc
}
