"""Stand-alone photovoltaic + battery system simulator.

Models a PV array (single-diode), a lead-acid battery bank, a quasi-static
boost converter, two MPPT controllers (perturb & observe and a Mamdani fuzzy
controller) and a five-mode power-management supervisor, driven by a
fixed-timestep engine with CSV input/output.
"""

from pvbatsim._kernels import backend_name

__version__ = "0.1.0"

__all__ = ["backend_name", "__version__"]
