#pragma once

#include "polarcurv/version.hpp"
#include "polarcurv/error.hpp"
#include "polarcurv/linalg.hpp"
#include "polarcurv/polygon2d.hpp"
#include "polarcurv/mesh.hpp"
#include "polarcurv/obj_io.hpp"
#include "polarcurv/surfaces.hpp"
#include "polarcurv/generators.hpp"
#include "polarcurv/parallel.hpp"
#include "polarcurv/normals.hpp"
#include "polarcurv/polar_dual.hpp"
#include "polarcurv/loops.hpp"
#include "polarcurv/curvature.hpp"
#include "polarcurv/correspondence.hpp"
#include "polarcurv/energy.hpp"
#include "polarcurv/normal_fit.hpp"
