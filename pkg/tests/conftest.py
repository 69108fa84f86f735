import pytest

from wadalakes import raster_oracle as ro


@pytest.fixture(scope="session")
def const3_day6_level7():
    return ro.rasterize("const:3", 6, level=7)


@pytest.fixture(scope="session")
def const3_day7_level8():
    return ro.rasterize("const:3", 7, level=8)


@pytest.fixture(scope="session")
def const4_day4_level5():
    return ro.rasterize("const:4", 4, level=5)


@pytest.fixture(scope="session")
def list345_day5_level6():
    return ro.rasterize("list:3,4,5;cycle", 5, level=6)
