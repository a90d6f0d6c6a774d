#pragma once

#include "proxpinv/core.hpp"
#include "proxpinv/errors.hpp"
#include "proxpinv/matio.hpp"
#include "proxpinv/oracle.hpp"
#include "proxpinv/problem.hpp"
#include "proxpinv/solver.hpp"
#include "proxpinv/version.hpp"
