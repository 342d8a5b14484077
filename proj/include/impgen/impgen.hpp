#ifndef IMPGEN_IMPGEN_HPP
#define IMPGEN_IMPGEN_HPP

#include "impgen/abducibles.hpp"
#include "impgen/core.hpp"
#include "impgen/engine.hpp"
#include "impgen/error.hpp"
#include "impgen/oracle.hpp"
#include "impgen/problem.hpp"
#include "impgen/propositional.hpp"
#include "impgen/sexpr.hpp"
#include "impgen/smt_process.hpp"
#include "impgen/store.hpp"

#endif // IMPGEN_IMPGEN_HPP
