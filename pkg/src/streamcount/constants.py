"""Integer codes shared by the compiled and pure event kernels."""

SCHEME_WSD = 0
SCHEME_GPSA = 1
SCHEME_NAIVE_GPS = 2

SCHEMES = {"wsd": SCHEME_WSD, "gpsa": SCHEME_GPSA, "naive-gps": SCHEME_NAIVE_GPS}

PATTERN_WEDGE = 0
PATTERN_TRIANGLE = 1
PATTERN_FOURCLIQUE = 2

PATTERN_CODES = {"wedge": PATTERN_WEDGE, "triangle": PATTERN_TRIANGLE, "fourclique": PATTERN_FOURCLIQUE}
PATTERN_EDGES = {PATTERN_WEDGE: 2, PATTERN_TRIANGLE: 3, PATTERN_FOURCLIQUE: 6}

POLICY_CONSTANT = 0
POLICY_HEURISTIC = 1
POLICY_LEARNED = 2
POLICY_SCRIPTED = 3

# insertion outcomes
ADMITTED_NONFULL = 0
ADMITTED_EVICT = 1
REJECTED = 2

# deletion outcomes
DELETE_REMOVED = 0
DELETE_TAGGED = 1
DELETE_ABSENT = 2

V_AGG_MAX = 0
V_AGG_AVG = 1
