#pragma once

#include "filedrawer/conditional.hpp"
#include "filedrawer/inference.hpp"
#include "filedrawer/montecarlo.hpp"
#include "filedrawer/normal.hpp"
#include "filedrawer/selection.hpp"
#include "filedrawer/selfcheck.hpp"
#include "filedrawer/solve.hpp"
