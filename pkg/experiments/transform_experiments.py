#
# Wave packet transform checks on the desk grid: packet normalization,
# isometry and reconstruction over the test family, Hardy norms at p = 2,
# the alternative norm and norm independence between two profile pairs.
#

import numpy as np

from fiohardy.constants import Constants
from fiohardy.field import GridSpec, set_workers
from fiohardy.metric import generator, random_directions
from fiohardy.packets import plancherel_defect
from fiohardy.transform import (TransformPlan, hardy_norm, isometry_defect, norm_independence,
                                reconstruction_error, test_family)
from fiohardy.utilities import configure_logging, sig_figs

mc = Constants()
mc.logging_on = True
configure_logging(mc)
set_workers(mc.fft_workers)

grid = GridSpec(mc.dim, mc.points_per_axis, mc.extent)
plan = TransformPlan.from_constants(mc, grid)
other = TransformPlan.from_constants(mc, grid, mc.second_bump)
print(mc)

# packet normalization at random resolved frequencies
rng = generator(mc.seed)
zetas = random_directions(rng, 100, mc.dim) * rng.uniform(1.0, plan.resolved_band, (100, 1))
defects = [plancherel_defect(z, plan.profiles, plan.sphere, plan.sigmas) for z in zetas]
print('max plancherel defect:', sig_figs(max(defects), 3))

family = test_family(plan, mc.seed, mc.family_size)

s = ["{: >20} ".format(p) for p in ['function', 'isometry', 'reconstruct', 'H2/L2', 'value/alt p=1',
                                     'W/V p=1']]
print(''.join(s))
print("-" * 126)
for k, f in enumerate(family):
    h1 = hardy_norm(plan, f, 1)
    row = [k,
           sig_figs(isometry_defect(plan, f), 3),
           sig_figs(reconstruction_error(plan, f), 3),
           sig_figs(hardy_norm(plan, f, 2).value / f.norm(), 6),
           sig_figs(h1.value / h1.alt_value, 4),
           sig_figs(norm_independence(f, plan, other, 1), 4)]
    print(''.join("{: >20} ".format(v) for v in row))

ratios = np.array([norm_independence(f, plan, other, 'inf') for f in family])
print('W/V ratio range p=inf:', sig_figs(np.nanmin(ratios), 4), sig_figs(np.nanmax(ratios), 4))
