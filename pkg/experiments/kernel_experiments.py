#
# Lifted operator kernels: off-singularity fits for the identity and the
# half-wave propagator, the same fit against the wrong contact map, and
# residual tables separating smoothing operators from the propagator.
#

import numpy as np

from fiohardy.constants import Constants
from fiohardy.field import GridSpec, set_workers
from fiohardy.fio import (half_wave, identity_contact, identity_operator, kernel_peak, lifted_kernel,
                          offsing_fit, residual_check, smoothing_operator)
from fiohardy.transform import TransformPlan
from fiohardy.utilities import configure_logging, sig_figs
from plotting.plots import plot_kernel_slice

mc = Constants()
mc.logging_on = True
configure_logging(mc)
set_workers(mc.fft_workers)

grid = GridSpec(mc.dim, mc.points_per_axis, mc.extent)
plan_w = TransformPlan.from_constants(mc, grid)
plan_v = TransformPlan.from_constants(mc, grid, mc.second_bump)

wave = half_wave(mc.t, mc.eps, mc.dim, plan_w.profiles)
operators = {'identity': identity_operator(mc.dim), 'halfwave': wave}

s = ["{: >20} ".format(p) for p in ['operator', 'contact', 'C_fit', 'refined', 'stable']]
print(''.join(s))
print("-" * 105)
for name, T in operators.items():
    report = offsing_fit(T, plan_w, plan_v, 3)
    row = [name, report.contact, sig_figs(report.C_fit, 4), sig_figs(report.refined_C, 4), report.refinement_stable]
    print(''.join("{: >20} ".format(str(v)) for v in row))

wrong = offsing_fit(wave, plan_w, plan_v, 3, contact=identity_contact(), refine=False)
print(''.join("{: >20} ".format(str(v)) for v in ['halfwave', 'identity', sig_figs(wrong.C_fit, 4), '', '']))

e1 = np.eye(mc.dim)[0]
kernel = lifted_kernel(wave, plan_w, plan_v, 0.0625, 0.0625, e1, e1)
print('half-wave kernel peak:', kernel_peak(kernel), ' expected', -mc.t * e1)
plot_kernel_slice(kernel, title='Half-wave lifted kernel')

smooth = residual_check(smoothing_operator(mc.smoothing_width, mc.dim), plan_w, plan_v)
fine = residual_check(smoothing_operator(mc.smoothing_width, mc.dim), plan_w.refined(2), plan_v.refined(2))
propagator = residual_check(wave, plan_w, plan_v)
s = ["{: >20} ".format(p) for p in ['N', 'smoothing', 'refined', 'halfwave']]
print(''.join(s))
print("-" * 84)
for N in smooth.orders:
    row = [N, sig_figs(smooth.sup(N), 4), sig_figs(fine.sup(N), 4), sig_figs(propagator.sup(N), 4)]
    print(''.join("{: >20} ".format(v) for v in row))
