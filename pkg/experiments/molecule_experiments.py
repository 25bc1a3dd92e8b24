#
# Coherent molecules: single wave packets across scales and molecules
# synthesized from atoms on random balls, on the desk grid and its
# refinement.
#

import numpy as np

from fiohardy.analysis import MoleculeSpec, molecule_check, molecule_experiment
from fiohardy.constants import Constants
from fiohardy.field import GridSpec, set_workers
from fiohardy.metric import CospherePoint
from fiohardy.packets import PacketIndex, packet_field
from fiohardy.transform import TransformPlan
from fiohardy.utilities import configure_logging, sig_figs

mc = Constants()
mc.logging_on = True
configure_logging(mc)
set_workers(mc.fft_workers)

grid = GridSpec(mc.dim, mc.points_per_axis, mc.extent)
plan = TransformPlan.from_constants(mc, grid)
e1 = np.eye(mc.dim)[0]

s = ["{: >20} ".format(p) for p in ['sigma', 'support', 'decay']]
print(''.join(s))
print("-" * 63)
for sigma in (2.0**-3, 2.0**-4, 2.0**-5, 2.0**-6):
    f = packet_field(PacketIndex(e1, sigma), plan.profiles, grid)
    spec = MoleculeSpec(mc.molecule_s, np.inf, CospherePoint(np.zeros(mc.dim), e1), 4.0 * sigma)
    support, decay = molecule_check(f, spec)
    print(''.join("{: >20} ".format(str(v)) for v in [sig_figs(sigma, 4), support, sig_figs(decay, 4)]))

for p in (plan, plan.refined(mc.refinement_factor)):
    report = molecule_experiment(p, 10, mc.seed, mc.c2, mc.molecule_s)
    print(report.grid_tag, 'decay constant', sig_figs(report.maximum('decay'), 4),
          ' max H^1 norm', sig_figs(report.maximum('hardy_norm_1'), 4), ' passed:', report.passed)
