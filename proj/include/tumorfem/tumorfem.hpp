#ifndef TUMORFEM_TUMORFEM_HPP
#define TUMORFEM_TUMORFEM_HPP

#include "tumorfem/assembly.hpp"
#include "tumorfem/cg.hpp"
#include "tumorfem/config.hpp"
#include "tumorfem/dense.hpp"
#include "tumorfem/diagnostics.hpp"
#include "tumorfem/errors.hpp"
#include "tumorfem/field.hpp"
#include "tumorfem/io.hpp"
#include "tumorfem/mesh.hpp"
#include "tumorfem/model.hpp"
#include "tumorfem/oracle.hpp"
#include "tumorfem/sparse.hpp"
#include "tumorfem/stepper.hpp"
#include "tumorfem/tensor.hpp"

#endif
