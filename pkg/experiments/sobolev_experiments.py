#
# Sobolev embeddings: sharpness of the L^1 loss of the half-wave propagator,
# the embedding ratios at several exponents and uniform bounds in time.
#

from fiohardy.analysis import (embedding_experiment, sobolev_sharpness_experiment,
                               wave_uniformity_experiment, write_summary)
from fiohardy.constants import Constants
from fiohardy.field import GridSpec, set_workers
from fiohardy.transform import TransformPlan, test_family
from fiohardy.utilities import configure_logging, output_data, sig_figs
from plotting.plots import plot_growth, plot_report

mc = Constants()
mc.logging_on = True
configure_logging(mc)
set_workers(mc.fft_workers)
output_data(mc.as_dict(), 'sobolev_constants.json')

grid = GridSpec(mc.dim, mc.points_per_axis, mc.extent)
plan = TransformPlan.from_constants(mc, grid)

for kind in ('radial', 'packet'):
    report = sobolev_sharpness_experiment(plan, mc.t, mc.lambdas, kind, mc.eps, mc.exponent_tol,
                                          mc.min_r_squared, mc.seed)
    print(kind, 'test functions')
    s = ["{: >20} ".format(p) for p in ['quantity', 'lambda', 'ratio']]
    print(''.join(s))
    print("-" * 63)
    for quantity, lam, value in report.measurements:
        print(''.join("{: >20} ".format(v) for v in [quantity, lam, sig_figs(value, 4)]))
    for key, fit in report.exponents.items():
        print(key, 'exponent', sig_figs(fit.slope, 4), '+-', sig_figs(fit.halfwidth, 3),
              ' R^2', sig_figs(fit.r_squared, 4))
    print('passed:', report.passed)
    plot_report(report)
    write_summary(f'sharpness_{kind}.json', report)

family = test_family(plan, mc.seed, mc.family_size)
for p in (1, 4.0 / 3.0, 2, 4):
    report = embedding_experiment(plan, p, family, mc.lambdas, tol=mc.exponent_tol, seed=mc.seed)
    row = [sig_figs(p, 3)] + [sig_figs(report.maximum(key + '_max'), 4) for key in report.exponents]
    print(''.join("{: >20} ".format(v) for v in row), ' passed:', report.passed)
    series = {key: [v for q, _, v in report.measurements if q == key] for key in report.exponents}
    plot_growth(mc.lambdas, series, report.exponents, f'Embedding ratios, p = {sig_figs(p, 3)}',
                f'embed_{sig_figs(p, 3)}')
    write_summary(f'embed_{sig_figs(p, 3)}.json', report)

report = wave_uniformity_experiment(plan, mc.wave_times, family, eps=mc.eps, seed=mc.seed)
s = ["{: >20} ".format(p) for p in ['quantity', 'p', 'max ratio']]
print(''.join(s))
print("-" * 63)
for quantity, p, value in report.measurements:
    print(''.join("{: >20} ".format(v) for v in [quantity, p, sig_figs(value, 5)]))
print('passed:', report.passed)
write_summary('waveunif.json', report)
