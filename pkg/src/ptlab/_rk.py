"""Compiled fixed-step RK4 kernel for ``phi'' = (V(x) - E) phi`` along a ray.

The ray is ``x = r e^{i theta}`` and the kernel works in the radial
coordinate, so the second-order equation reads
``d^2 phi / dr^2 = e^{2 i theta} (V - E) phi``.  Integration always runs
inward, from ``r = rho`` to ``r = 0``, where the decaying solution grows
and is numerically stable.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def integrate_ray(energies, rot, v_knots, v_mids, r_knots, node_steps,
                  v_start, dv_start, out_phi, out_dphi):
    """Integrate one ray for every energy in ``energies``.

    ``r_knots`` (decreasing, ending at 0) are substep boundaries with
    potential values ``v_knots``; ``v_mids`` are values at substep
    midpoints.  ``node_steps[k]`` is the knot index of output node ``k``.
    ``out_phi``/``out_dphi`` (shape ``(len(energies), len(node_steps))``)
    receive ``phi`` and ``d phi / dx`` at the nodes.

    Returns -1 on success, otherwise the knot index at which the solution
    stopped being finite.
    """
    rot2 = rot * rot
    n_steps = r_knots.shape[0] - 1
    for e in range(energies.shape[0]):
        E = energies[e]
        q = v_start - E
        s = np.sqrt(q)
        if (s * rot).real < 0:
            s = -s
        y = 1.0 + 0.0j
        # d phi/dx of the outward-decaying WKB branch, converted to d/dr
        z = (-s - dv_start / (4.0 * q)) * rot
        k = 0
        if node_steps[0] == 0:
            out_phi[e, 0] = y
            out_dphi[e, 0] = z / rot
            k = 1
        for i in range(n_steps):
            h = r_knots[i + 1] - r_knots[i]
            a0 = rot2 * (v_knots[i] - E)
            am = rot2 * (v_mids[i] - E)
            a1 = rot2 * (v_knots[i + 1] - E)
            k1y = z
            k1z = a0 * y
            k2y = z + 0.5 * h * k1z
            k2z = am * (y + 0.5 * h * k1y)
            k3y = z + 0.5 * h * k2z
            k3z = am * (y + 0.5 * h * k2y)
            k4y = z + h * k3z
            k4z = a1 * (y + h * k3y)
            y = y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
            z = z + h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
            if not (np.isfinite(y.real) and np.isfinite(y.imag)
                    and np.isfinite(z.real) and np.isfinite(z.imag)):
                return i + 1
            if k < node_steps.shape[0] and node_steps[k] == i + 1:
                out_phi[e, k] = y
                out_dphi[e, k] = z / rot
                k += 1
    return -1
