#pragma once

#include "conductors/integer_kernel.hpp"
#include "conductors/residue_set.hpp"
#include "conductors/family.hpp"
#include "conductors/local_reduction.hpp"
#include "conductors/theory.hpp"
#include "conductors/congruence_lab.hpp"
#include "conductors/empirics.hpp"
