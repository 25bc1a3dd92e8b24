import matplotlib
matplotlib.use('Agg')

from fiohardy.analysis import ExperimentReport, fit_exponent
from plotting import plots


def test_growth_plot_is_written(tmp_path, monkeypatch):
    monkeypatch.setattr(plots, 'plotdir', str(tmp_path) + '/')
    lambdas = [4.0, 8.0, 16.0, 32.0]
    series = {'r1': [1.0, 1.41, 2.0, 2.83], 'r2': [1.0, 1.02, 0.99, 1.01]}
    fits = {key: fit_exponent(lambdas, values) for key, values in series.items()}
    plots.plot_growth(lambdas, series, fits, 'Embedding ratios, p = 1', 'embed_1')
    assert (tmp_path / 'embed_1.pdf').stat().st_size > 0


def test_report_plot_picks_the_sweep(tmp_path, monkeypatch):
    monkeypatch.setattr(plots, 'plotdir', str(tmp_path) + '/')
    report = ExperimentReport('sharpness', 'n2_m32', 0, {})
    for lam, r1 in zip([4.0, 8.0, 16.0], [1.0, 1.4, 2.0]):
        report.add('r1', lam, r1)
        report.add('r2', lam, 1.0)
    plots.plot_report(report)
    assert (tmp_path / 'sharpness_n2_m32.pdf').exists()
