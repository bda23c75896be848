//! Published reference values the report compares against. The toolkit
//! computes everything from first principles; these constants exist only so
//! the report can quantify how close (or how far) the reproduction lands.

/// Reference RSS at the macro cell edge (D = 1.2 km), dBm.
pub const EDGE_RSS_DBM: f64 = -95.0;

/// Reference threshold at which the load curves were said to saturate for a
/// 100 m exclusion radius, dBm. The pathloss model itself puts the macro RSS
/// at the exclusion radius at -54.5 dBm, a 4.5 dB discrepancy the report
/// flags.
pub const SATURATION_THRESHOLD_DBM: f64 = -50.0;

/// Reference balanced threshold for a 100 m exclusion radius, dBm.
pub const BALANCED_THRESHOLD_100M_DBM: f64 = -83.4;

/// Reference balanced-threshold table: (exclusion radius m, threshold dBm).
pub const BALANCED_THRESHOLDS: [(f64, f64); 10] = [
    (200.0, -85.7),
    (300.0, -87.1),
    (400.0, -88.6),
    (500.0, -89.8),
    (600.0, -90.9),
    (700.0, -92.1),
    (800.0, -93.8),
    (900.0, -95.0),
    (1000.0, -95.0),
    (1100.0, -95.0),
];

/// Exclusion radii at which the reference table clamps to the edge RSS.
pub const CLAMPED_RADII_M: [f64; 3] = [900.0, 1000.0, 1100.0];

/// Tolerance for the reported (not asserted) balanced-threshold comparison.
pub const BALANCED_THRESHOLD_TOL_DB: f64 = 3.0;

/// Reference monthly energy savings percentages per offered load
/// {0.2, 0.4, 0.6, 0.8, 1.0}, for the plain active-idle scheme and its soft-
/// and hard-QoS variants. With the reference power figures (100 mW active,
/// 60 + 3 mW idle) the largest savings the energy equations can produce is
/// 37%, so most of these published values are unreachable from the stated
/// model; the report reproduces the orderings and trends only.
pub const SAVINGS_ACTIVE_IDLE: [f64; 5] = [47.81, 43.70, 40.33, 37.58, 35.32];
pub const SAVINGS_SOFT: [f64; 5] = [85.06, 83.88, 82.92, 82.13, 81.48];
pub const SAVINGS_HARD: [f64; 5] = [92.76, 92.19, 91.72, 91.34, 91.03];
pub const SAVINGS_RHO_GRID: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];
