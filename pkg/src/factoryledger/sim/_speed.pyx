# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tick engine: port of _kernel_py.advance.

Bit-identical to the pure engine: integer counter RNG in uint64
arithmetic, noise through libm (same calls CPython's math module makes),
and no float contraction (setup.py passes -ffp-contract=off). Semantic
changes must land in _kernel_py.py first; the parity test compares the
two byte-for-byte.
"""

from libc.math cimport cos, log, sqrt
from libc.stdlib cimport free, malloc

KERNEL_NAME = "cython"

cdef unsigned long long FL_GOLDEN = 0x9E3779B97F4A7C15
cdef double TWO_PI = 6.283185307179586
cdef double INV_2_53 = 1.1102230246251565e-16

cdef enum:
    KIND_POT = 0
    KIND_LOAD = 1
    KIND_PRESSURE = 2
    KIND_CONV_TEMP = 3
    KIND_CONV_SPEED = 4
    KIND_CONV_VIB = 5
    KIND_ESTOP = 6
    KIND_CONTAINER_TEMP = 7
    KIND_HUMIDITY = 8
    KIND_GYRO = 9
    KIND_GPS = 10

cdef enum:
    MODE_OFFSET = 0
    MODE_SET_VALUE = 1
    MODE_PRESS = 2


cdef inline unsigned long long _mix64(unsigned long long x) nogil:
    x += FL_GOLDEN
    x = (x ^ (x >> 30)) * <unsigned long long> 0xBF58476D1CE4E5B9
    x = (x ^ (x >> 27)) * <unsigned long long> 0x94D049BB133111EB
    return x ^ (x >> 31)


cdef inline double _gauss(
    unsigned long long seed, unsigned long long key, long long tick
) nogil:
    cdef unsigned long long h, u1, u2
    cdef double f1, f2
    h = _mix64(_mix64(seed ^ key) ^ ((<unsigned long long> tick) * FL_GOLDEN))
    u1 = _mix64(h ^ 1)
    u2 = _mix64(h ^ 2)
    f1 = <double> ((u1 >> 11) + 1) * INV_2_53
    f2 = <double> (u2 >> 11) * INV_2_53
    return sqrt(-2.0 * log(f1)) * cos(TWO_PI * f2)


def advance(k, long long tick0, long long n_ticks, long long profile_phase,
            out_tick, out_sidx, out_val):
    """Advance n_ticks, filling the preallocated output arrays.

    Returns (readings_written, new_profile_phase). Mutates k.conv_temp
    and k.conv_safety in place.
    """
    cdef long[:] kind = k.kind
    cdef long[:] asset = k.asset
    cdef long long[:] period = k.period
    cdef double[:] sigma = k.sigma
    cdef unsigned long long[:] key = k.key
    cdef long[:] gps_chan = k.gps_chan
    cdef long[:] estop_idx = k.estop_idx
    cdef int n_sensors = k.n_sensors
    cdef int n_estop = estop_idx.shape[0]
    cdef unsigned long long seed = k.seed

    cdef double k_heat = k.k_heat
    cdef double k_cool = k.k_cool
    cdef double t_safe = k.t_safe
    cdef double t_clear = k.t_safe - k.hysteresis
    cdef double s_safe = k.s_safe
    cdef double ambient = k.ambient
    cdef double dt = k.dt
    cdef double commanded_speed = k.commanded_speed

    cdef long long cycle = k.cycle_ticks
    cdef long long grip_start = k.grip_start
    cdef long long grip_end = k.grip_end
    cdef long long[:] robot_offsets = k.robot_offsets
    cdef double pot_amplitude = k.pot_amplitude
    cdef double load_idle = k.load_idle
    cdef double load_grip = k.load_grip
    cdef double pressure_idle = k.pressure_idle
    cdef double pressure_grip = k.pressure_grip
    cdef double vib_per_speed = k.vib_per_speed
    cdef double container_temp = k.container_temp
    cdef double container_humidity = k.container_humidity
    cdef double gyro_baseline = k.gyro_baseline

    cdef long long[:] wp_tick = k.wp_tick
    cdef double[:] wp_lat = k.wp_lat
    cdef double[:] wp_lon = k.wp_lon
    cdef int n_wp = wp_tick.shape[0]

    cdef double[:] conv_temp = k.conv_temp
    cdef long[:] conv_safety = k.conv_safety
    cdef int n_conv = conv_temp.shape[0]

    cdef long long[:] inj_start = k.inj_start
    cdef long long[:] inj_end = k.inj_end
    cdef long[:] inj_sidx = k.inj_sidx
    cdef long[:] inj_mode = k.inj_mode
    cdef double[:] inj_mag = k.inj_mag
    cdef int n_inj = inj_start.shape[0]

    cdef long long[:] o_tick = out_tick
    cdef long[:] o_sidx = out_sidx
    cdef double[:] o_val = out_val

    cdef double* cur_actual = <double*> malloc(n_conv * sizeof(double))
    if cur_actual == NULL:
        raise MemoryError()

    cdef long long t, p
    cdef int written = 0, c, s, e, i, j, found, mode, kd, a
    cdef bint halted
    cdef double commanded, temp, actual, value, eff, pos, tri, f
    cdef long safety

    try:
        for t in range(tick0 + 1, tick0 + n_ticks + 1):
            halted = False
            for e in range(n_estop):
                s = estop_idx[e]
                found = -1
                for j in range(n_inj):
                    if inj_sidx[j] == s and inj_start[j] <= t < inj_end[j]:
                        found = j
                if found >= 0:
                    mode = inj_mode[found]
                    if mode == MODE_PRESS:
                        eff = 1.0
                    else:
                        eff = inj_mag[found]
                    if eff >= 0.5:
                        halted = True
                        break
            commanded = 0.0 if halted else commanded_speed

            for c in range(n_conv):
                temp = conv_temp[c]
                safety = conv_safety[c]
                actual = min(commanded, s_safe) if safety else commanded
                temp = temp + dt * (k_heat * actual - k_cool * (temp - ambient))
                if temp > t_safe:
                    safety = 1
                elif temp < t_clear:
                    safety = 0
                conv_temp[c] = temp
                conv_safety[c] = safety
                cur_actual[c] = min(commanded, s_safe) if safety else commanded

            if not halted:
                profile_phase += 1

            for s in range(n_sensors):
                if t % period[s] != 0:
                    continue
                kd = kind[s]
                a = asset[s]
                if kd == KIND_POT:
                    p = (profile_phase + robot_offsets[a]) % cycle
                    pos = <double> p / <double> cycle
                    tri = 2.0 * pos if pos < 0.5 else 2.0 - 2.0 * pos
                    value = pot_amplitude * tri
                elif kd == KIND_LOAD:
                    p = (profile_phase + robot_offsets[a]) % cycle
                    value = load_grip if grip_start <= p < grip_end else load_idle
                elif kd == KIND_PRESSURE:
                    p = (profile_phase + robot_offsets[a]) % cycle
                    value = (
                        pressure_grip if grip_start <= p < grip_end else pressure_idle
                    )
                elif kd == KIND_CONV_TEMP:
                    value = conv_temp[a]
                elif kd == KIND_CONV_SPEED:
                    value = cur_actual[a]
                elif kd == KIND_CONV_VIB:
                    value = vib_per_speed * cur_actual[a]
                elif kd == KIND_ESTOP:
                    value = 0.0
                elif kd == KIND_CONTAINER_TEMP:
                    value = container_temp
                elif kd == KIND_HUMIDITY:
                    value = container_humidity
                elif kd == KIND_GYRO:
                    value = gyro_baseline
                else:  # KIND_GPS
                    if n_wp == 1 or t <= wp_tick[0]:
                        i = 0
                        f = 0.0
                    elif t >= wp_tick[n_wp - 1]:
                        i = n_wp - 2
                        f = 1.0
                    else:
                        i = 0
                        while wp_tick[i + 1] <= t:
                            i += 1
                        f = (
                            <double> (t - wp_tick[i])
                            / <double> (wp_tick[i + 1] - wp_tick[i])
                        )
                    if n_wp == 1:
                        value = wp_lat[0] if gps_chan[s] == 0 else wp_lon[0]
                    elif gps_chan[s] == 0:
                        value = wp_lat[i] + (wp_lat[i + 1] - wp_lat[i]) * f
                    else:
                        value = wp_lon[i] + (wp_lon[i + 1] - wp_lon[i]) * f

                if sigma[s] > 0.0:
                    value = value + sigma[s] * _gauss(seed, key[s], t)

                found = -1
                for j in range(n_inj):
                    if inj_sidx[j] == s and inj_start[j] <= t < inj_end[j]:
                        found = j
                if found >= 0:
                    mode = inj_mode[found]
                    if mode == MODE_PRESS:
                        value = 1.0
                    elif mode == MODE_SET_VALUE:
                        value = inj_mag[found]
                    else:
                        value = value + inj_mag[found]

                o_tick[written] = t
                o_sidx[written] = s
                o_val[written] = value
                written += 1
    finally:
        free(cur_actual)

    return written, profile_phase
