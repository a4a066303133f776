#pragma once

#include "nnfem/analysis.hpp"
#include "nnfem/assembly.hpp"
#include "nnfem/benchmarks.hpp"
#include "nnfem/boxqp.hpp"
#include "nnfem/element.hpp"
#include "nnfem/mesh.hpp"
#include "nnfem/quadrature.hpp"
#include "nnfem/reaction.hpp"
#include "nnfem/solvers.hpp"
#include "nnfem/tensor_field.hpp"
