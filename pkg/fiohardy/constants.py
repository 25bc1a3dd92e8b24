import os
import numpy as np

from fiohardy.errors import ConfigurationError
from fiohardy.utilities import import_data, read_flat_config


class Constants:
    def __init__(self):

        # grid constants
        # ---------------------------------------------------------------
        self.dim = 2                    # spatial dimension n
        self.points_per_axis = 128      # samples per axis M
        self.extent = 2.0 * np.pi       # torus side length L, lattice frequency spacing 2pi/L = 1
        self.refinement_factor = 2      # M -> 2M for refinement checks

        # phase space constants
        # ---------------------------------------------------------------
        self.angles = 128               # directions A on the sphere
        self.sigma_levels = 48          # sub-unit sigma levels J, the cap level comes on top
        self.sigma_min = 2.0**-7        # smallest packet scale

        # profile constants
        # ---------------------------------------------------------------
        self.bump = 'standard'          # generating bump for W
        self.second_bump = 'skewed'     # bump for the independent transform V
        self.c_sigma_tol = 1e-6         # quadrature doubling stops below this relative change
        self.profile_table_size = 20001 # samples for the tabulated smoothed step and cap

        # tent space constants
        # ---------------------------------------------------------------
        self.center_stride = 8          # ball centers every center_stride grid points
        self.direction_stride = 8       # ball directions every direction_stride angles
        self.radius_count = 8           # geometric radii between sqrt(sigma_min) and the diameter

        # monte carlo constants
        # ---------------------------------------------------------------
        self.trials = 200000
        self.seed = 20240607

        # operator constants
        # ---------------------------------------------------------------
        self.t = 1.0                    # half-wave time
        self.eps = 0.25                 # high-pass radius, a(eta) = 0 for |eta| < eps
        self.smoothing_width = 0.5      # gaussian kernel width of the smoothing operator
        self.newton_max_steps = 50
        self.newton_tol = 1e-12
        self.decay_orders = [1, 2, 3]

        # molecule constants
        # ---------------------------------------------------------------
        self.molecule_s = 1.5
        # lower equivalence constant between the quasi-metric and the reduced
        # form; sampling gives min ratio 1 for the closed form quasi-metric
        self.c2 = 1.0

        # experiment constants
        # ---------------------------------------------------------------
        self.lambdas = [4.0, 8.0, 16.0, 32.0]
        self.wave_times = [-2.0, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0]
        self.family_size = 30
        self.exponent_tol = 0.15
        self.min_r_squared = 0.95
        self.sharpness_kind = 'radial'

        # runtime settings
        # ---------------------------------------------------------------
        self.fft_workers = -1           # scipy.fft workers, -1 uses all cores
        self.logging_on = False
        self.cache_limit_bytes = 2**30  # packet spectra are cached below this size


    def as_dict(self):
        mcd = {}
        for key, value in vars(self).items():
            if isinstance(value, np.ndarray):
                value = value.tolist()
            mcd[key] = value
        return mcd


    def update_from_dictionary(self, mcd):
        known = vars(self)
        for key, value in mcd.items():
            if key not in known:
                raise ConfigurationError(f"unknown setting '{key}'")
            current = known[key]
            if isinstance(current, bool):
                value = bool(value)
            elif isinstance(current, int) and not isinstance(value, bool):
                if float(value) != int(value):
                    raise ConfigurationError(f"setting '{key}' must be an integer, got {value}")
                value = int(value)
            elif isinstance(current, float):
                value = float(value)
            elif isinstance(current, list) and not isinstance(value, list):
                value = [value]
            setattr(self, key, value)
        self.validate()


    def validate(self):
        if self.dim not in (2, 3):
            raise ConfigurationError(f"dim must be 2 or 3, got {self.dim}")
        if self.points_per_axis % 2 or self.points_per_axis < 16:
            raise ConfigurationError("points_per_axis must be even and at least 16")
        if self.extent <= 0:
            raise ConfigurationError("extent must be positive")
        if not 0 < self.sigma_min < 1:
            raise ConfigurationError("sigma_min must lie in (0, 1)")
        if self.angles < 4 or self.sigma_levels < 1:
            raise ConfigurationError("need at least 4 angles and 1 sigma level")


    @classmethod
    def from_file(cls, filename):
        mc = cls()
        if os.path.splitext(filename)[1] == '.json':
            mc.update_from_dictionary(import_data(filename))
        else:
            mc.update_from_dictionary(read_flat_config(filename))
        return mc


    # printing the constants puts them in the experiment logs and reports
    def __repr__(self):
        s = 'Constants \n' + '---------------------\n'
        s += 'Grid constants: \n'
        s += '-----------------------------------------------\n'
        s += f"{'dim:':20}  {str(self.dim):15}\n"
        s += f"{'M:':20}  {str(self.points_per_axis):15}\n"
        s += f"{'L:':20}  {str(self.extent):15}\n"
        s += 'Phase space constants: \n'
        s += '-----------------------------------------------\n'
        s += f"{'angles:':20}  {str(self.angles):15}\n"
        s += f"{'sigma levels:':20}  {str(self.sigma_levels):15}\n"
        s += f"{'sigma min:':20}  {str(self.sigma_min):15}\n"
        s += f"{'bumps:':20}  {self.bump}, {self.second_bump}\n"
        s += 'Tent constants: \n'
        s += '-----------------------------------------------\n'
        s += f"{'center stride:':20}  {str(self.center_stride):15}\n"
        s += f"{'direction stride:':20}  {str(self.direction_stride):15}\n"
        s += f"{'radius count:':20}  {str(self.radius_count):15}\n"
        s += 'Operator constants: \n'
        s += '-----------------------------------------------\n'
        s += f"{'t:':20}  {str(self.t):15}\n"
        s += f"{'eps:':20}  {str(self.eps):15}\n"
        s += f"{'smoothing width:':20}  {str(self.smoothing_width):15}\n"
        s += f"{'decay orders:':20}  {str(self.decay_orders)}\n"
        s += 'Experiment constants: \n'
        s += '-----------------------------------------------\n'
        s += f"{'lambdas:':20}  {str(self.lambdas)}\n"
        s += f"{'wave times:':20}  {str(self.wave_times)}\n"
        s += f"{'seed:':20}  {str(self.seed):15}\n"
        s += f"{'trials:':20}  {str(self.trials):15}\n"
        return s


mc = Constants()
