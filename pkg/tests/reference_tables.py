"""Reference error profiles for u = sin^2(pi x) sin^2(pi y), three significant digits.

Each entry is ``grid: (l2_error, l2_order, h2_error, h2_order, dim)``.
"""

TABLES = {
    ("bfs", 4): {
        1: (0.837e-01, 0.0, 0.287e01, 0.0, 25),
        2: (0.939e-02, 3.2, 0.161e01, 0.8, 64),
        3: (0.150e-03, 6.0, 0.147e00, 3.5, 196),
        4: (0.461e-05, 5.0, 0.184e-01, 3.0, 676),
        5: (0.143e-06, 5.0, 0.231e-02, 3.0, 2500),
        6: (0.447e-08, 5.0, 0.288e-03, 3.0, 9604),
        7: (0.162e-09, 4.8, 0.360e-04, 3.0, 37636),
    },
    ("serendipity", 4): {
        1: (0.375e00, 0.0, 0.174e02, 0.0, 24),
        2: (0.468e-01, 3.0, 0.470e01, 1.9, 60),
        3: (0.704e-03, 6.1, 0.239e00, 4.3, 180),
        4: (0.111e-04, 6.0, 0.212e-01, 3.5, 612),
        5: (0.290e-06, 5.3, 0.248e-02, 3.1, 2244),
        6: (0.869e-08, 5.1, 0.306e-03, 3.0, 8580),
        7: (0.382e-09, 4.5, 0.381e-04, 3.0, 33540),
    },
    ("bfs", 5): {
        1: (0.324e-01, 0.0, 0.435e01, 0.0, 36),
        2: (0.138e-03, 7.9, 0.918e-01, 5.6, 100),
        3: (0.789e-05, 4.1, 0.146e-01, 2.7, 324),
        4: (0.130e-06, 5.9, 0.912e-03, 4.0, 1156),
        5: (0.206e-08, 6.0, 0.570e-04, 4.0, 4356),
        6: (0.302e-10, 6.1, 0.356e-05, 4.0, 16900),
    },
    ("serendipity", 5): {
        1: (0.375e00, 0.0, 0.136e02, 0.0, 32),
        2: (0.433e-01, 3.1, 0.459e01, 1.6, 84),
        3: (0.419e-03, 6.7, 0.227e00, 4.3, 260),
        4: (0.492e-05, 6.4, 0.106e-01, 4.4, 900),
        5: (0.697e-07, 6.1, 0.562e-03, 4.2, 3332),
        6: (0.103e-08, 6.1, 0.323e-04, 4.1, 12804),
    },
    ("bfs", 6): {
        1: (0.157e-02, 0.0, 0.802e00, 0.0, 49),
        2: (0.706e-04, 4.5, 0.499e-01, 4.0, 144),
        3: (0.394e-06, 7.5, 0.115e-02, 5.4, 484),
        4: (0.310e-08, 7.0, 0.360e-04, 5.0, 1764),
        5: (0.258e-10, 6.9, 0.113e-05, 5.0, 6724),
    },
    ("serendipity", 6): {
        1: (0.375e00, 0.0, 0.137e02, 0.0, 40),
        2: (0.131e-01, 4.8, 0.158e01, 3.1, 108),
        3: (0.222e-03, 5.9, 0.370e-01, 5.4, 340),
        4: (0.208e-05, 6.7, 0.800e-03, 5.5, 1188),
        5: (0.169e-07, 6.9, 0.197e-04, 5.3, 4420),
    },
    ("bfs", 7): {
        1: (0.115e-02, 0.0, 0.379e00, 0.0, 64),
        2: (0.964e-06, 10.2, 0.253e-02, 7.2, 196),
        3: (0.183e-07, 5.7, 0.763e-04, 5.0, 676),
        4: (0.731e-10, 8.0, 0.119e-05, 6.0, 2500),
        5: (0.158e-10, 2.2, 0.185e-07, 6.0, 9604),
    },
    ("serendipity", 7): {
        1: (0.375e00, 0.0, 0.140e02, 0.0, 48),
        2: (0.380e-02, 6.6, 0.430e00, 5.0, 132),
        3: (0.668e-05, 9.2, 0.426e-02, 6.7, 420),
        4: (0.247e-07, 8.1, 0.541e-04, 6.3, 1476),
        5: (0.313e-10, 9.6, 0.735e-06, 6.2, 5508),
    },
    ("bfs", 8): {
        1: (0.531e-04, 0.0, 0.716e-01, 0.0, 81),
        2: (0.546e-06, 6.6, 0.743e-03, 6.6, 256),
        3: (0.755e-09, 9.5, 0.433e-05, 7.4, 900),
        4: (0.557e-11, 7.1, 0.334e-07, 7.0, 3364),
    },
    ("serendipity", 8): {
        1: (0.465e-01, 0.0, 0.389e01, 0.0, 57),
        2: (0.365e-03, 7.0, 0.465e-01, 6.4, 160),
        3: (0.133e-05, 8.1, 0.421e-03, 6.8, 516),
        4: (0.229e-08, 9.2, 0.292e-05, 7.2, 1828),
    },
}


def entries():
    """``(flavor, k, grid, row)`` for every reference row."""
    for (flavor, k), rows in TABLES.items():
        for g, row in rows.items():
            yield flavor, k, g, row
