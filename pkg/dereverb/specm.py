"""Spectral-mapping dereverberation: d(t,f) = M(t,f) x(t,f)"""


def specm_apply(spec, mask):
    """Elementwise complex product, the mask broadcast across channels"""
    mask.check_matches(spec)
    return spec.with_values(spec.values * mask.values[None])
