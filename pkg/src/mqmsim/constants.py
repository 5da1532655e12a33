"""Physical constants (CODATA 2018), SI units."""

HBAR = 1.054571817e-34  # reduced Planck constant, J s
K_B = 1.380649e-23  # Boltzmann constant, J / K
G_NEWTON = 6.67430e-11  # gravitational constant, m^3 kg^-1 s^-2
