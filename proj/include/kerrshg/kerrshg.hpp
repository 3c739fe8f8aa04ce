#pragma once

#include "kerrshg/errors.hpp"
#include "kerrshg/material.hpp"
#include "kerrshg/model.hpp"
#include "kerrshg/oracle.hpp"
#include "kerrshg/spectra.hpp"
