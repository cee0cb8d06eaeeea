#pragma once

#include <gtest/gtest.h>

#include "pulses/fault.hpp"

#define EXPECT_FAULT(stmt, code)                                                        \
  do {                                                                                  \
    try {                                                                               \
      (void)(stmt);                                                                     \
      ADD_FAILURE() << "no failure from " #stmt;                                        \
    } catch (const pulses::Failure& f_) {                                               \
      EXPECT_EQ(f_.fault(), code) << #stmt << ": " << f_.what();                        \
    }                                                                                   \
  } while (0)
