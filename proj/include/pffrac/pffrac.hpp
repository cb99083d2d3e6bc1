#pragma once

#include "assembly.hpp"
#include "config.hpp"
#include "fespace.hpp"
#include "lagrange.hpp"
#include "material.hpp"
#include "mesh.hpp"
#include "output.hpp"
#include "quadrature.hpp"
#include "solver.hpp"
