"""Shared independent oracles for the test suite.

These are deliberately written without the package's own differentiation or
sparsity machinery so they can serve as cross-checks for it.
"""

import numpy as np

# acceptance tests append "PASS/FAIL  <n>. <detail>" lines here; they are
# echoed after the run, outside pytest's output capture
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def central_fd_jacobian(f, u, theta, h=1e-6):
    """Plain central-difference Jacobian, column by column."""
    u = np.asarray(u, dtype=float)
    f0 = np.asarray(f(u, theta), dtype=float)
    J = np.zeros((len(f0), len(u)))
    for j in range(len(u)):
        step = h * max(1.0, abs(u[j]))
        up, um = u.copy(), u.copy()
        up[j] += step
        um[j] -= step
        J[:, j] = (np.asarray(f(up, theta), dtype=float)
                   - np.asarray(f(um, theta), dtype=float)) / (2.0 * step)
    return J


def brusselator_stencil_mask(N):
    """Boolean coupling mask for the two-field periodic 5-point stencil."""
    nn = N * N
    mask = np.zeros((2 * nn, 2 * nn), dtype=bool)

    def idx(i, j):
        return (i % N) * N + (j % N)

    for i in range(N):
        for j in range(N):
            c = idx(i, j)
            for di, dj in ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)):
                mask[c, idx(i + di, j + dj)] = True
                mask[nn + c, nn + idx(i + di, j + dj)] = True
            mask[c, nn + c] = True
            mask[nn + c, c] = True
    return mask


def mask_of_pattern(pattern):
    m = np.zeros((pattern.n_rows, pattern.n_cols), dtype=bool)
    for r, c in pattern.nonzeros:
        m[r, c] = True
    return m
