"""nlheat: numerics and exact algebra for the nonlocal heat equation u_t = J*u - u."""

__version__ = "0.1.0"
