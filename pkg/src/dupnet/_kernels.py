"""Compiled inner loop of the exact event simulation.

The kernel consumes pre-drawn standard exponentials (holding times) and
uniforms (jump category) so that the random stream is owned by a numpy
``Generator`` on the Python side and runs are reproducible per seed.
"""

import numpy as np
from numba import njit

UP, DUP, LOSS = 0, 1, 2

# why the kernel returned
NEED_RANDOM = 0
HORIZON = 1
ABSORBED = 2
BUFFER_FULL = 3
THRESHOLD = 4


@njit(cache=True, nogil=True)
def advance(state, clock, cursor, f_n, dup_rate, mu, horizon, exps, unifs,
            rec_t, rec_k, rec_x0, rec_x1, grid, grid_x0, grid_x1, stop_x0):
    """Run the jump chain until one of the stop conditions holds.

    ``state`` = [x0, x1], ``clock`` = [t], ``cursor`` = [random index,
    records written, next grid index]; all three are updated in place.
    Recording is off when ``rec_t`` has length 0.
    """
    x0 = state[0]
    x1 = state[1]
    t = clock[0]
    i = cursor[0]
    n_rec = cursor[1]
    gi = cursor[2]
    record = rec_t.shape[0] > 0
    n_grid = grid.shape[0]
    status = NEED_RANDOM
    while i < exps.shape[0]:
        r_up = 2.0 * mu * (f_n - x0 - x1)
        r_dup = dup_rate if x1 > 0 else 0.0
        r_loss = mu * x1
        total = r_up + r_dup + r_loss
        if total <= 0.0:
            status = ABSORBED
            break
        t_next = t + exps[i] / total
        if t_next > horizon:
            status = HORIZON
            break
        if record and n_rec == rec_t.shape[0]:
            status = BUFFER_FULL
            break
        while gi < n_grid and grid[gi] < t_next:
            grid_x0[gi] = x0
            grid_x1[gi] = x1
            gi += 1
        u = unifs[i] * total
        if u < r_up:
            kind = UP
        elif u < r_up + r_dup:
            kind = DUP
        elif r_loss > 0.0:
            kind = LOSS
        elif r_dup > 0.0:
            kind = DUP
        else:
            kind = UP
        if kind == UP:
            x1 += 1
        elif kind == DUP:
            x1 -= 1
        else:
            x1 -= 1
            x0 += 1
        i += 1
        t = t_next
        if record:
            rec_t[n_rec] = t
            rec_k[n_rec] = kind
            rec_x0[n_rec] = x0
            rec_x1[n_rec] = x1
            n_rec += 1
        if x0 >= stop_x0:
            status = THRESHOLD
            break
    if status == HORIZON or status == ABSORBED:
        limit = np.inf if status == ABSORBED else horizon
        while gi < n_grid and grid[gi] <= limit:
            grid_x0[gi] = x0
            grid_x1[gi] = x1
            gi += 1
    state[0] = x0
    state[1] = x1
    clock[0] = t
    cursor[0] = i
    cursor[1] = n_rec
    cursor[2] = gi
    return status


@njit(cache=True, nogil=True)
def advance_mm1(value, clock, cursor, arrival, service, horizon, exps, unifs, rec_t, rec_v):
    """Birth-death counterpart of :func:`advance` for an M/M/1 queue."""
    x = value[0]
    t = clock[0]
    i = cursor[0]
    n_rec = cursor[1]
    status = NEED_RANDOM
    while i < exps.shape[0]:
        down = service if x > 0 else 0.0
        total = arrival + down
        if total <= 0.0:
            status = ABSORBED
            break
        t_next = t + exps[i] / total
        if t_next > horizon:
            status = HORIZON
            break
        if n_rec == rec_t.shape[0]:
            status = BUFFER_FULL
            break
        if unifs[i] * total < arrival or down == 0.0:
            x += 1
        else:
            x -= 1
        i += 1
        t = t_next
        rec_t[n_rec] = t
        rec_v[n_rec] = x
        n_rec += 1
    value[0] = x
    clock[0] = t
    cursor[0] = i
    cursor[1] = n_rec
    return status
