// Frozen reference values generated by tools/gen_reference.py
// (adaptive Gauss-Kronrod on the defining integrals, cross-checked
//  against mpmath arbitrary-precision evaluations).

pub const K_TABLE: &[(f64, f64)] = &[
    (0.0, 1.5707963267948966),
    (0.1, 1.574745561517356),
    (0.3, 1.6080486199305124),
    (0.5, 1.6857503548125963),
    (0.7, 1.8456939983747231),
    (0.9, 2.2805491384227703),
    (0.99, 3.3566005233611915),
];

pub const F_TABLE: &[(f64, f64, f64)] = &[
    (0.3, 0.5, 0.30111597966406606),
    (1.2, 0.5, 1.2607117273569366),
    (1.5707963267948966, 0.5, 1.6857503548125963),
    (2.5, 0.5, 2.7193320071060865),
    (3.141592653589793, 0.5, 3.3715007096251917),
    (4.0, 0.8, 4.920337152983222),
    (7.0, 0.8, 8.738962320750348),
    (-1.3, 0.6, -1.4145108366402988),
    (10.0, 0.3, 10.226218827966882),
    (0.7, 0.95, 0.7574003912480958),
];

pub const E_TABLE: &[(f64, f64, f64)] = &[
    (0.4, 0.5, 0.39740234681831144),
    (1.0, 0.5, 0.9648764542686276),
    (1.5707963267948966, 0.5, 1.4674622093394272),
    (3.0, 0.6, 2.694743959823965),
    (1.5707963267948966, 0.8, 1.2763499431699064),
    (2.0, 0.9, 1.3802633483392455),
];

pub const AM_TABLE: &[(f64, f64, f64)] = &[
    (0.25, 0.5, 0.2493575238730513),
    (1.0, 0.5, 0.9660310526366139),
    (2.0, 0.5, 1.8440491178856988),
    (3.3, 0.5, 3.070107158129439),
    (5.0, 0.5, 4.6628013359701725),
    (-2.0, 0.5, -1.8440491178856988),
    (1.5, 0.9, 1.2026069549732032),
    (8.0, 0.9, 5.307911448864558),
    (0.6, 0.0, 0.6),
];

pub const RHO_TABLE: &[(f64, f64)] = &[
    (0.1, 2.993222846126381),
    (0.3, 1.8738202425274144),
    (0.5, 1.3169578969248168),
    (0.9, 0.4671453081032621),
];

// caustic invariants for a=1, e0=0.5: k_l = c/sqrt(a^2-l^2),
// delta_l = 2F(asin(l/b); k_l), omega_l = delta_l/(4K(k_l))
pub const CAUSTIC_TABLE: &[(f64, f64, f64, f64)] = &[
    (0.08660254037844387, 0.5018856132284956, 0.20041915428438634, 0.029704484734158095),
    (0.25980762113533157, 0.5177803730784978, 0.611894145742737, 0.09021328106328891),
    (0.4330127018922193, 0.5547001962252291, 1.0616482019763551, 0.15445157321817543),
    (0.606217782649107, 0.6286946134619315, 1.6108430331322838, 0.22697593622734127),
    (0.7794228634059948, 0.798086884467622, 2.5607878573770364, 0.3214457939605131),
];

pub const PERIMETER_A1_E05: f64 = 5.869848837357709;

// unweighted  ∫_0^{2π} mode(z)^2 dz  for (q, k) pairs
pub const MODE_L2SQ_TABLE: &[(u32, f64, f64, f64)] = &[
    (3, 0.6, 3.927160728943633, 3.926820905030851),
    (4, 0.55, 3.761646577630467, 3.7616427209440926),
    (5, 0.52, 3.6779639031915368, 3.6779638596121726),
];

// ∫_0^{2π} |c_q| dz  equals 8K(k)/π; both sides frozen
pub const MODE_ABS_TABLE: &[(u32, f64, f64, f64)] = &[
    (3, 0.6, 4.4582579499360016, 4.458257949935615),
    (5, 0.52, 4.321303682018594, 4.321303682018036),
];

// weighted squared norms of the five generators at e0=0.5
pub const GEN_WNORMSQ_E05: &[(&str, f64)] = &[
    ("h", 6.283185307179585),
    ("t1", 3.141592653589793),
    ("t2", 3.141592653589793),
    ("r", 3.141592653589793),
    ("hr", 3.141592653589793),
];

pub const LAZUTKIN_X_E05: &[(f64, f64)] = &[
    (0.5, 0.07490562379783665),
    (1.0, 0.15384189554530742),
    (1.5707963267948966, 0.25),
    (3.0, 0.4789840285748747),
    (6.283185307179586, 0.9999999999999998),
];

// circle radius 1: maximal (p,q) orbit lengths 2 q sin(pi p/q)
pub const CIRCLE_LMAX: &[(u32, u32, f64)] = &[
    (1, 3, 5.196152422706632),
    (1, 4, 5.65685424949238),
    (1, 5, 5.877852522924732),
    (2, 5, 9.510565162951535),
    (1, 7, 6.074372347645814),
    (3, 7, 13.648990770545531),
];

// maximal inscribed q-gon perimeters, ellipse a=1, e0=0.3
// (independent oracle: Nelder-Mead over vertex angles, 40 restarts)
pub const ELLIPSE_LMAX_E03: &[(u32, f64)] = &[
    (3, 5.079300835465077),
    (4, 5.528109984434103),
    (5, 5.743702086775493),
];

pub const STRIP_INTEGRAL_TABLE: &[(f64, f64, f64)] = &[
    (0.2, 0.4, 1.6478861250193833),
    (0.3, 0.6, 1.1832104031684731),
    (0.5, 0.8, 0.8260688313661632),
    (0.55, 0.6, 1.5578624242145431),
];
