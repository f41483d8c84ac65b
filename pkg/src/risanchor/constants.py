SPEED_OF_LIGHT = 299_792_458.0  # m/s

# |c nu| / (v f_c) above this is treated as the Doppler boundary.
DOPPLER_SINGULAR_MARGIN = 1e-9
