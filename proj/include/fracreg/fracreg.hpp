#pragma once

#include "fracreg/common.hpp"
#include "fracreg/grid.hpp"
#include "fracreg/kernel.hpp"
#include "fracreg/quadrature.hpp"
#include "fracreg/assembly.hpp"
#include "fracreg/solver.hpp"
#include "fracreg/analysis.hpp"
#include "fracreg/experiments.hpp"
#include "fracreg/io.hpp"
#include "fracreg/config.hpp"
#include "fracreg/report.hpp"
