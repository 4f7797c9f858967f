"""Encodings shared by both kernel backends."""

# pair domain bits; a pair (i, j) with i < j is "forward" when i -> j
FWD = 1
BWD = 2
ABS = 4
ALL = FWD | BWD | ABS

# fact kinds as seen by the kernels
K_INDEP = 0
K_DEP = 1
K_ARROW = 2
K_NOEDGE = 3

# search outcomes
DONE = 0
TIMEOUT = 1
CAPPED = 2

WEIGHT_EPS = 1e-9
