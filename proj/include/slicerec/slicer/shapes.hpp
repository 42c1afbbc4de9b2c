#pragma once

#include <string>
#include <vector>

#include "slicerec/core/rng.hpp"
#include "slicerec/geometry/mesh.hpp"

namespace srec {

// Procedural desk-scale stand-ins for large shape collections. Every family
// assembles closed solids only (thin walls are thin boxes, hollow shades are
// double-walled), which keeps the parity-ray sign test valid everywhere.
// All shapes come out normalized (unit bbox diagonal, centered).
//
// Part ids of interest are stable: see kLampBulbPart.

inline constexpr int kLampBulbPart = 3;

enum class ShapeFamily {
    Box,
    Sphere,
    Torus,
    Table,
    Chair,
    Lamp,
    PrimitiveUnion,
    CabinetLegsA,  // two-variant ambiguous pair: four corner legs
    CabinetLegsB,  // ... one central pillar, identical outside
};

const char* family_name(ShapeFamily family);
ShapeFamily family_from_name(const std::string& name);

TriangleMesh make_shape(ShapeFamily family, Rng& rng);

// Deterministic mixed suite over the occlusion-rich families; shape k of a
// suite only depends on (seed, k).
TriangleMesh make_suite_shape(uint64_t seed, int index);
ShapeFamily suite_family(int index);

}  // namespace srec
