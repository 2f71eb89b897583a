"""Pure-Python tick engine.

Reference implementation of the kernel ABI (see kernel.py). The compiled
engine in _speed.pyx is a line-for-line port; any semantic change here
must be mirrored there.
"""

from __future__ import annotations

from math import cos, log, sqrt

KERNEL_NAME = "pure-python"

_M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_TWO_PI = 6.283185307179586
_INV_2_53 = 1.1102230246251565e-16  # 2**-53

# ABI codes, frozen (kernel.py documents them)
_KIND_POT = 0
_KIND_LOAD = 1
_KIND_PRESSURE = 2
_KIND_CONV_TEMP = 3
_KIND_CONV_SPEED = 4
_KIND_CONV_VIB = 5
_KIND_ESTOP = 6
_KIND_CONTAINER_TEMP = 7
_KIND_HUMIDITY = 8
_KIND_GYRO = 9
_KIND_GPS = 10

_MODE_OFFSET = 0
_MODE_SET_VALUE = 1
_MODE_PRESS = 2


def _mix64(x: int) -> int:
    x = (x + _GOLDEN) & _M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


def _gauss(seed: int, key: int, tick: int) -> float:
    h = _mix64(_mix64(seed ^ key) ^ ((tick * _GOLDEN) & _M64))
    u1 = _mix64(h ^ 1)
    u2 = _mix64(h ^ 2)
    f1 = ((u1 >> 11) + 1) * _INV_2_53  # (0, 1]
    f2 = (u2 >> 11) * _INV_2_53  # [0, 1)
    return sqrt(-2.0 * log(f1)) * cos(_TWO_PI * f2)


def advance(k, tick0, n_ticks, profile_phase, out_tick, out_sidx, out_val):
    """Advance n_ticks, filling the preallocated output arrays.

    Returns (readings_written, new_profile_phase). Mutates k.conv_temp
    and k.conv_safety in place.
    """
    n_sensors = k.n_sensors
    kind = k.kind
    asset = k.asset
    period = k.period
    sigma = k.sigma
    key = k.key
    gps_chan = k.gps_chan
    estop_idx = k.estop_idx
    seed = k.seed

    k_heat = k.k_heat
    k_cool = k.k_cool
    t_safe = k.t_safe
    t_clear = k.t_safe - k.hysteresis
    s_safe = k.s_safe
    ambient = k.ambient
    dt = k.dt
    commanded_speed = k.commanded_speed

    cycle = k.cycle_ticks
    grip_start = k.grip_start
    grip_end = k.grip_end
    robot_offsets = k.robot_offsets

    wp_tick = k.wp_tick
    wp_lat = k.wp_lat
    wp_lon = k.wp_lon
    n_wp = len(wp_tick)

    conv_temp = k.conv_temp
    conv_safety = k.conv_safety
    n_conv = len(conv_temp)
    cur_actual = [0.0] * n_conv

    inj_start = k.inj_start
    inj_end = k.inj_end
    inj_sidx = k.inj_sidx
    inj_mode = k.inj_mode
    inj_mag = k.inj_mag
    n_inj = len(inj_start)

    def last_injection(s: int, t: int) -> int:
        found = -1
        for j in range(n_inj):
            if inj_sidx[j] == s and inj_start[j] <= t < inj_end[j]:
                found = j
        return found

    written = 0
    for t in range(tick0 + 1, tick0 + n_ticks + 1):
        # e-stop state decides whether the cell is halted this tick
        halted = False
        for e in estop_idx:
            j = last_injection(e, t)
            if j >= 0:
                mode = inj_mode[j]
                if mode == _MODE_PRESS:
                    eff = 1.0
                elif mode == _MODE_SET_VALUE:
                    eff = inj_mag[j]
                else:
                    eff = inj_mag[j]
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
            if kd == _KIND_POT:
                p = (profile_phase + robot_offsets[a]) % cycle
                pos = p / cycle
                tri = 2.0 * pos if pos < 0.5 else 2.0 - 2.0 * pos
                value = k.pot_amplitude * tri
            elif kd == _KIND_LOAD:
                p = (profile_phase + robot_offsets[a]) % cycle
                value = k.load_grip if grip_start <= p < grip_end else k.load_idle
            elif kd == _KIND_PRESSURE:
                p = (profile_phase + robot_offsets[a]) % cycle
                value = (
                    k.pressure_grip if grip_start <= p < grip_end else k.pressure_idle
                )
            elif kd == _KIND_CONV_TEMP:
                value = conv_temp[a]
            elif kd == _KIND_CONV_SPEED:
                value = cur_actual[a]
            elif kd == _KIND_CONV_VIB:
                value = k.vib_per_speed * cur_actual[a]
            elif kd == _KIND_ESTOP:
                value = 0.0
            elif kd == _KIND_CONTAINER_TEMP:
                value = k.container_temp
            elif kd == _KIND_HUMIDITY:
                value = k.container_humidity
            elif kd == _KIND_GYRO:
                value = k.gyro_baseline
            else:  # _KIND_GPS
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
                    f = (t - wp_tick[i]) / (wp_tick[i + 1] - wp_tick[i])
                if n_wp == 1:
                    value = wp_lat[0] if gps_chan[s] == 0 else wp_lon[0]
                elif gps_chan[s] == 0:
                    value = wp_lat[i] + (wp_lat[i + 1] - wp_lat[i]) * f
                else:
                    value = wp_lon[i] + (wp_lon[i + 1] - wp_lon[i]) * f

            if sigma[s] > 0.0:
                value = value + sigma[s] * _gauss(seed, key[s], t)

            j = last_injection(s, t)
            if j >= 0:
                mode = inj_mode[j]
                if mode == _MODE_PRESS:
                    value = 1.0
                elif mode == _MODE_SET_VALUE:
                    value = inj_mag[j]
                else:
                    value = value + inj_mag[j]

            out_tick[written] = t
            out_sidx[written] = s
            out_val[written] = value
            written += 1

    return written, profile_phase
