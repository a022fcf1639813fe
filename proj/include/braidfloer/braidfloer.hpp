#pragma once

#include "braid_word.hpp"
#include "cli_io.hpp"
#include "conley_complex.hpp"
#include "discrete_braid.hpp"
#include "floer_pipeline.hpp"
#include "garside.hpp"
#include "gf2_homology.hpp"
#include "maslov.hpp"
#include "parabolic_flow.hpp"
