"""Writes reference NetCDF classic files with scipy for the reader tests.

The expected values are regenerated from the formulas below, so the C++
test can assert them without trusting the C++ writer.
"""
import sys
import numpy as np
from scipy.io import netcdf_file


def write(path, version):
    f = netcdf_file(path, "w", version=version)
    f.title = "reference grid"
    f.createDimension("time", None)
    f.createDimension("lat", 3)
    f.createDimension("lon", 4)
    lat = f.createVariable("lat", "f8", ("lat",))
    lat[:] = [30.0, 25.0, 20.0]
    lat.units = "degrees_north"
    lon = f.createVariable("lon", "f4", ("lon",))
    lon[:] = [-90.0, -89.5, -89.0, -88.5]
    t = f.createVariable("time", "i4", ("time",))
    t.units = "hours since 1993-06-01 00:00:00"
    sst = f.createVariable("sst", "i2", ("time", "lat", "lon"))
    sst.scale_factor = 0.01
    sst.add_offset = 0.0
    sst._FillValue = np.int16(-32768)
    sst.units = "degree_C"
    data = np.zeros((2, 3, 4), dtype=np.int16)
    for k in range(2):
        for i in range(3):
            for j in range(4):
                data[k, i, j] = 1000 + 100 * k + 10 * i + j
    data[1, 2, 3] = -32768
    sst[:] = data
    t[:] = [0, 6]
    zeta = f.createVariable("zeta", "f4", ("time", "lon"))
    zeta[:] = np.array([[0.5, -0.25, 1.0, 2.79], [0.0, 9.96921e36, -1.5, 0.125]], dtype=np.float32)
    f.close()


if __name__ == "__main__":
    out = sys.argv[1]
    write(out + "/scipy_classic.nc", 1)
    write(out + "/scipy_offset64.nc", 2)
