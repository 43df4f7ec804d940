"""multbox: a desk-scale laboratory for multiplicative approximation on the torus.

Submodules
----------
core           torus distance, hyperbolic volumes, membership scans
psi            threshold function families
bumps          smooth compactly supported windows and their transforms
boxes          periodic rectangle specs, inner/outer covers, admissible systems
windows        smoothed periodic box functions and exact Fourier coefficients
intersections  exact interval algebra for periodic sets and quasi-independence
measures       surface and hyperplane measures with samplers and transforms
moments        first/second moments, transference diagnostics, lower bounds
counts         Diophantine exponent fits and lattice point counting
harness        experiment presets, CSV emission, manifests
cli            command line entry point
"""

__version__ = "0.1.0"
