#
# Geometry of the cosphere bundle: doubling of ball volumes, equivalence of
# the quasi-metric with its reduced form, the quasi-triangle constant and
# the bi-Lipschitz ratio of a translation along the geodesic flow.
#

import numpy as np

from fiohardy.constants import Constants
from fiohardy.metric import (ContactMapSample, bilipschitz_ratio, doubling_profile, metric_equivalence,
                             quasi_triangle_constant)
from fiohardy.utilities import configure_logging, sig_figs
from plotting.plots import plot_volume

mc = Constants()
mc.logging_on = True
configure_logging(mc)

taus = [0.05, 0.1, 0.2, 0.4, 2.0, 4.0, 8.0]
study = doubling_profile(taus, mc.trials, mc.seed, mc.dim)

s = ["{: >20} ".format(p) for p in ['tau', 'volume', 'stderr']]
print(''.join(s))
print("-" * 63)
for tau, volume, stderr, _, _ in study.rows():
    print(''.join("{: >20} ".format(sig_figs(v, 4)) for v in [tau, volume, stderr]))

print('small ball slope:', sig_figs(study.slope(0.05, 0.4)[0], 4), ' expected', 2 * mc.dim)
print('large ball slope:', sig_figs(study.slope(2.0, 8.0)[0], 4), ' expected', mc.dim)
print('doubling ratios:', [sig_figs(r, 3) for r in study.doubling_ratios()])

lo, hi = metric_equivalence(100000, mc.seed, mc.dim)
print('d / reduced d range:', sig_figs(lo, 6), sig_figs(hi, 6), ' bound', sig_figs(np.sqrt(2), 6))
print('quasi-triangle constant:', sig_figs(quasi_triangle_constant(100000, mc.seed, mc.dim), 4))

# geodesic flow for time t: (x, w) -> (x + t w, w)
flow = ContactMapSample(lambda x, w: (x + mc.t * w, w))
upper, lower = bilipschitz_ratio(flow, 100000, mc.seed, mc.dim)
print('geodesic flow bi-Lipschitz ratios:', sig_figs(lower, 4), sig_figs(upper, 4))

plot_volume(study.taus, study.volumes, study.stderrs, mc.dim)
