import math

# Numerical tolerances
TOL = {
    "algebraic": 1e-12,
    "positivity": 1e-10,
}

# Two-qubit basis ordering. First factor is clone A (idler side), second is clone B (signal side)
BASIS_ORDER = ("HH", "HV", "VH", "VV")

STATE_LABELS = ("H", "V", "D", "A", "R", "L")
BASIS_LABELS = ("HV", "DA", "RL")
ROLES = ("psi", "perp")

CON_CLONER = {
    "t_min": 0.0,
    "t_max": 1.0,
    "standard_settings": 6,  # t = sqrt(n/5), n = 0..5
    "curve_points": 200,
}

CON_DETECT = {
    "eta_min": 0.2,
    "eta_max": 5.0,
}

CON_CALIB = {
    "start": (1.0, 1.0),
    "bounds": (0.2, 5.0),
    "prescan": {
        "min": 0.5,
        "max": 2.0,
        "points": 50,
    },
    "xatol": 1e-11,
    "fatol": 1e-14,
    "maxiter": 4000,
    "boundary_tolerance": 1e-6,
    # Hessian eigenvalue ratio below which one efficiency is not fixed by the data
    "identifiability_ratio": 1e-9,
    "curvature_step": 1e-4,
    "objectives": ("a", "b", "sum"),
    "modes": ("pooled", "per_t"),
}

CON_ROBUST = {
    "fd_step": 1e-5,
    "eps_max": 0.1,
    "eps_points": 21,
    # |eps| must stay below this so eta = 1 + eps keeps inside the efficiency range
    "eps_limit": 1.0 - CON_DETECT["eta_min"],
}

CON_RUN = {
    "t_values": tuple(math.sqrt(n / 5) for n in range(CON_CLONER["standard_settings"])),
    "eta_a": 1.046,
    "eta_b": 0.840,
    "counts_per_setting": 1e5,
    "seed": 9771,
    "noiseless": False,
    "calibration_objective": "sum",
    "calibration_mode": "pooled",
    "output_path": "out/run.csv",
    "output_format": "csv",
    "strict": False,
    "machine": None,
    "eps_max": CON_ROBUST["eps_max"],
    "eps_points": CON_ROBUST["eps_points"],
    "curve_points": CON_CLONER["curve_points"],
}

EXIT_CODES = {
    "ok": 0,
    "config": 1,
    "data": 2,
    "boundary": 3,
}

# Column orders of everything written to disk
TABLE_SCHEMAS = {
    "records": ("t", "state", "basis", "role", "c_pp", "c_pm", "c_mp", "c_mm", "eta_a", "eta_b"),
    "analytic": ("kind", "t", "f_a", "f_b", "p", "success_prob", "tradeoff_residual"),
    "report": ("stage", "t", "state", "basis", "role", "f_a", "f_b"),
    "summary": ("stage", "t", "mean_a", "mean_b", "variance_a", "variance_b", "tradeoff_gap"),
    "calibration": ("t", "eta_a", "eta_b", "objective", "objective_value", "boundary_hit", "identifiable",
                    "mean_a_before", "mean_b_before", "mean_a_after", "mean_b_after"),
    "robustness": ("eps_a", "eps_b", "exact_a", "quadratic_a", "bound_a",
                   "exact_b", "quadratic_b", "bound_b"),
    "coefficients": ("clone", "coeff_aa", "coeff_ab", "coeff_bb", "bound_factor"),
}

# Significant digits for every number written to a table
FLOAT_DIGITS = 12
