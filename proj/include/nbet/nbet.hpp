#pragma once

#include "nbet/betting.hpp"
#include "nbet/builtin.hpp"
#include "nbet/classify.hpp"
#include "nbet/error.hpp"
#include "nbet/family.hpp"
#include "nbet/geometry.hpp"
#include "nbet/io.hpp"
#include "nbet/linalg.hpp"
#include "nbet/lp.hpp"
#include "nbet/numerics.hpp"
#include "nbet/perron.hpp"
#include "nbet/rng.hpp"
#include "nbet/sequences.hpp"
#include "nbet/support.hpp"
#include "nbet/trajectory.hpp"
#include "nbet/word.hpp"
