"""liquidbench: liquid-simulation benchmark and perceptual-study toolkit.

Subpackages:
  core        staggered grid, particles, scenarios, SPH kernels, neighbor search
  eulerian    MP / LS / FLIP / APIC grid solvers sharing one pressure projection
  lagrangian  WCSPH / IISPH / wall-boundary SPH particle solvers
  skinning    particle -> signed distance field -> triangle mesh reconstruction
  study       pairwise study manifests, vote handling, consistency filtering
  analytics   Bradley-Terry score fitting and Pearson correlation reports
"""

__version__ = "0.1.0"
