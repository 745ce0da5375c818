# Bandsel - mutual-information band selection for hyperspectral cubes
