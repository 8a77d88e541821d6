#pragma once

#include "fockforge/error.hpp"
#include "fockforge/molecule.hpp"
#include "fockforge/basis.hpp"
#include "fockforge/builtin_basis.hpp"
#include "fockforge/graphene.hpp"
#include "fockforge/boys.hpp"
#include "fockforge/integrals.hpp"
#include "fockforge/matrix.hpp"
#include "fockforge/jacobi.hpp"
#include "fockforge/dist.hpp"
#include "fockforge/fock.hpp"
#include "fockforge/scf.hpp"
#include "fockforge/bench.hpp"
