#ifndef PULSES_PULSES_HPP
#define PULSES_PULSES_HPP

#include "pulses/fault.hpp"
#include "pulses/linalg.hpp"
#include "pulses/pulse.hpp"
#include "pulses/errors.hpp"
#include "pulses/expansion.hpp"
#include "pulses/sequences.hpp"
#include "pulses/shaped.hpp"
#include "pulses/twoqubit.hpp"
#include "pulses/bench.hpp"
#include "pulses/io.hpp"

#endif
