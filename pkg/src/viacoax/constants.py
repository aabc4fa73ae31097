"""Physical constants and unit factors (SI, CODATA 2018)."""

import math

C0 = 299_792_458.0  # m/s, exact
MU0 = 1.25663706212e-6  # H/m
EPS0 = 8.8541878128e-12  # F/m
ETA0 = math.sqrt(MU0 / EPS0)  # ~376.7303 ohm

MIL = 25.4e-6  # m, exact
MM = 1e-3

NEPER_TO_DB = 20.0 / math.log(10.0)  # ~8.686
