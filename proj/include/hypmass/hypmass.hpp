#pragma once

#include "hypmass/geometry.hpp"
#include "hypmass/halfspace.hpp"
#include "hypmass/polyhedron.hpp"
#include "hypmass/metric_field.hpp"
#include "hypmass/surface_geometry.hpp"
#include "hypmass/quadrature.hpp"
#include "hypmass/mass.hpp"
#include "hypmass/report.hpp"
#include "hypmass/experiments.hpp"
