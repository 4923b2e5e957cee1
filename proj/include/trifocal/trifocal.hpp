#pragma once

#include "trifocal/error.hpp"
#include "trifocal/geometry.hpp"
#include "trifocal/fermat.hpp"
#include "trifocal/contour.hpp"
#include "trifocal/geo.hpp"
#include "trifocal/export.hpp"
#include "trifocal/service.hpp"
