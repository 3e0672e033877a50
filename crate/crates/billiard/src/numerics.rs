//! Shared numerical kernels: adaptive Gauss-Kronrod quadrature, safeguarded
//! 1-D root finding, and Brent maximization.

/// Gauss 7 / Kronrod 15 nodes on [0,1] half-axis (positive abscissae).
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One G7/K15 panel on [a,b]; returns (kronrod value, |K15-G7| estimate).
fn gk15_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    let fc = f(c);
    let mut res_k = WGK[7] * fc;
    let mut res_g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let fsum = f(c - x) + f(c + x);
        res_k += WGK[i] * fsum;
        if i % 2 == 1 {
            res_g += WG[i / 2] * fsum;
        }
    }
    (res_k * h, ((res_k - res_g) * h).abs())
}

/// Adaptive Gauss-Kronrod integration of `f` over [a,b] to absolute
/// tolerance `tol`. Recursion splits the panel with tolerance halving;
/// depth is capped so a non-integrable input terminates with the best
/// available estimate rather than diverging.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (val, err) = gk15_panel(f, a, b);
        if err <= tol || depth >= 48 {
            return val;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth + 1) + rec(f, m, b, 0.5 * tol, depth + 1)
    }
    rec(f, a, b, tol, 0)
}

/// Fixed single-panel G7/K15 value on [a,b] (no adaptivity). Intended for
/// smooth integrands on short subintervals of a precomputed partition.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    gk15_panel(f, a, b).0
}

/// Safeguarded Newton: solve f(x)=0 on bracket [lo,hi] where f(lo) and
/// f(hi) have opposite signs. `fdf` returns (f, f'). Falls back to bisection
/// whenever the Newton step leaves the bracket or stalls.
pub fn newton_bisect<F: Fn(f64) -> (f64, f64)>(
    fdf: &F,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
    max_iter: u32,
) -> f64 {
    let (flo, _) = fdf(lo);
    if flo == 0.0 {
        return lo;
    }
    let (fhi, _) = fdf(hi);
    if fhi == 0.0 {
        return hi;
    }
    debug_assert!(
        flo.signum() != fhi.signum(),
        "newton_bisect: no sign change on [{lo}, {hi}]"
    );
    let lo_sign = flo.signum();
    let mut x = 0.5 * (lo + hi);
    for _ in 0..max_iter {
        let (fx, dfx) = fdf(x);
        if fx == 0.0 {
            return x;
        }
        if fx.signum() == lo_sign {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        x = if dfx != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= xtol {
            return x;
        }
    }
    x
}

/// Brent minimization on [a,b]; returns (argmin, min). Golden-section with
/// successive parabolic interpolation, standard tolerancing.
pub fn brent_min<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, max_iter: u32) -> (f64, f64) {
    let golden = 0.5 * (3.0 - 5.0_f64.sqrt());
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut x = a + golden * (b - a);
    let mut w = x;
    let mut v = x;
    let mut fx = f(x);
    let mut fw = fx;
    let mut fv = fx;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..max_iter {
        let m = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-15;
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut use_golden = true;
        if e.abs() > tol1 {
            // parabolic fit through (v,fv),(w,fw),(x,fx)
            let r = (x - w) * (fx - fv);
            let q0 = (x - v) * (fx - fw);
            let mut p = (x - v) * q0 - (x - w) * r;
            let mut q = 2.0 * (q0 - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_old = e;
            e = d;
            if p.abs() < (0.5 * q * e_old).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if m > x { tol1 } else { -tol1 };
                }
                use_golden = false;
            }
        }
        if use_golden {
            e = if x < m { b - x } else { a - x };
            d = golden * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + if d > 0.0 { tol1 } else { -tol1 }
        };
        let fu = f(u);
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

/// Brent maximization on [a,b]; returns (argmax, max).
pub fn brent_max<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, max_iter: u32) -> (f64, f64) {
    let (x, neg) = brent_min(&|t| -f(t), a, b, tol, max_iter);
    (x, -neg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_integrates_polynomials_exactly() {
        // K15 is exact through degree 22
        let v = gk15(&|x: f64| x.powi(10) - 3.0 * x.powi(3) + 1.0, -1.0, 2.0);
        let exact = (2048.0 + 1.0) / 11.0 - 3.0 * (16.0 - 1.0) / 4.0 + 3.0;
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        // integral of 1/(1e-4 + x^2) over [-1,1] = 2 atan(100)/0.01
        let v = integrate(&|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-11);
        let exact = 2.0 * (1.0 / 0.01) * (1.0_f64 / 0.01).atan();
        assert!((v - exact).abs() / exact < 1e-11);
    }

    #[test]
    fn newton_bisect_finds_root() {
        let r = newton_bisect(&|x: f64| (x * x - 2.0, 2.0 * x), 0.0, 2.0, 1e-15, 80);
        assert!((r - 2.0_f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn brent_finds_smooth_maximum() {
        let (x, fx) = brent_max(&|t: f64| t.sin(), 0.0, 3.0, 1e-13, 200);
        assert!((x - std::f64::consts::FRAC_PI_2).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-13);
    }
}
