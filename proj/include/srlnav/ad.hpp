#pragma once

#include "srlnav/ad/checkpoint.hpp"
#include "srlnav/ad/gradcheck.hpp"
#include "srlnav/ad/ops.hpp"
#include "srlnav/ad/optim.hpp"
#include "srlnav/ad/tape.hpp"
#include "srlnav/ad/tensor.hpp"
