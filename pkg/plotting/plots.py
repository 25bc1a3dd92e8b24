import os

import numpy as np
import matplotlib
import matplotlib.pyplot as plt

plotdir = "plots/"


def _save(name):
    os.makedirs(plotdir, exist_ok=True)
    plt.savefig(plotdir + name + ".pdf", format="pdf", bbox_inches="tight")
    plt.close()


def plot_growth(lambdas, series, fits=None, title='Growth in frequency', name='growth'):
    """series: dict label -> ratios along lambdas, fits: dict label -> ExponentFit"""
    fig, ax = plt.subplots()
    fig.suptitle(title)
    lambdas = np.asarray(lambdas, dtype=float)
    for label, values in series.items():
        line, = ax.loglog(lambdas, values, 'o-', label=label)
        if fits and label in fits:
            fit = fits[label]
            # anchor the fitted power law at the first sample
            guide = values[0] * (lambdas / lambdas[0])**fit.slope
            ax.loglog(lambdas, guide, '--', color=line.get_color(),
                      label=f'{label}: slope {fit.slope:.3f} $\\pm$ {fit.halfwidth:.3f}')
    ax.set_xlabel('$\\lambda$')
    ax.set_ylabel('ratio')
    ax.legend()
    _save(name)


def plot_volume(taus, volumes, stderrs, dim=2, name='volume_slope'):
    fig, ax = plt.subplots()
    fig.suptitle('Ball volumes')
    taus = np.asarray(taus)
    volumes = np.asarray(volumes)
    ax.errorbar(taus, volumes, yerr=stderrs, fmt='o', label='monte carlo')
    small = taus <= 1
    if np.any(small):
        ax.loglog(taus[small], volumes[small][0] * (taus[small] / taus[small][0])**(2 * dim), '--',
                  label=f'$\\tau^{{{2 * dim}}}$')
    if np.any(~small):
        ax.loglog(taus[~small], volumes[~small][0] * (taus[~small] / taus[~small][0])**dim, ':',
                  label=f'$\\tau^{{{dim}}}$')
    ax.set_xscale('log')
    ax.set_yscale('log')
    ax.set_xlabel('$\\tau$')
    ax.set_ylabel('$V(B_\\tau)$')
    ax.legend()
    _save(name)


def plot_kernel_slice(kernel, axis=0, title='Lifted kernel', name='kernel_slice'):
    """|K| along one coordinate axis through the peak, and the full modulus."""
    modulus = np.abs(kernel.values)
    peak = np.unravel_index(np.argmax(modulus), modulus.shape)
    index = list(peak)
    index[axis] = slice(None)
    x = kernel.grid.axis()

    fig, axs = plt.subplots(2)
    fig.set_figheight(8)
    fig.suptitle(title)
    axs[0].semilogy(x, np.maximum(modulus[tuple(index)], 1e-300))
    axs[0].set_ylabel('$|K|$')
    axs[0].set_xlabel(f'$x_{axis + 1}$')
    if kernel.grid.dim == 2:
        axs[1].imshow(modulus.T, origin='lower', extent=[x[0], x[-1], x[0], x[-1]],
                      norm=matplotlib.colors.LogNorm(vmin=max(modulus.max() * 1e-8, 1e-300)))
    _save(name)


def plot_report(report):
    """Plot whatever an experiment report carries."""
    rows = report.measurements
    if report.name == 'volume':
        taus = [p for q, p, _ in rows if q == 'volume']
        plot_volume(taus, [v for q, _, v in rows if q == 'volume'],
                    [v for q, _, v in rows if q == 'stderr'], name='volume_' + report.grid_tag)
        return
    lambdas = sorted({p for q, p, _ in rows if q in ('r1', 'r2')})
    if lambdas:
        series = {q: [v for k, _, v in rows if k == q] for q in ('r1', 'r2')}
        plot_growth(lambdas, series, report.exponents, 'Sharpness', 'sharpness_' + report.grid_tag)
        return
    labels = sorted({q for q, _, _ in rows})
    fig, ax = plt.subplots()
    fig.suptitle(report.name)
    for label in labels:
        values = [v for q, _, v in rows if q == label]
        ax.plot(np.arange(len(values)), values, 'o', label=label)
    ax.set_yscale('symlog')
    ax.legend()
    _save(report.name + '_' + report.grid_tag)
