#include <doctest.h>

#include <cmath>
#include <fstream>

#include "dynmap/core/hash.hpp"
#include "dynmap/core/rng.hpp"
#include "dynmap/core/vec2.hpp"

using namespace dynmap;

TEST_CASE("rng determinism and stream independence") {
    SUBCASE("same seed produces identical streams") {
        Rng a(42), b(42);
        for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
    }
    SUBCASE("uniform stays in [0,1)") {
        Rng r(7);
        for (int i = 0; i < 10000; ++i) {
            const double u = r.uniform();
            CHECK(u >= 0.0);
            CHECK(u < 1.0);
        }
    }
    SUBCASE("uniform(lo,hi) respects bounds and hits both halves") {
        Rng r(3);
        int below = 0;
        for (int i = 0; i < 1000; ++i) {
            const double u = r.uniform(-2.0, 6.0);
            CHECK(u >= -2.0);
            CHECK(u <= 6.0);
            if (u < 2.0) ++below;
        }
        CHECK(below > 300);
        CHECK(below < 700);
    }
    SUBCASE("split child does not perturb parent beyond one draw") {
        Rng a(9), b(9);
        Rng child = a.split();
        b.next_u64();  // consume the same single draw
        for (int i = 0; i < 100; ++i) child.next_u64();
        for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    }
    SUBCASE("gauss has sane first two moments") {
        Rng r(11);
        double sum = 0.0, sq = 0.0;
        const int n = 20000;
        for (int i = 0; i < n; ++i) {
            const double g = r.gauss();
            sum += g;
            sq += g * g;
        }
        CHECK(std::fabs(sum / n) < 0.05);
        CHECK(std::fabs(sq / n - 1.0) < 0.05);
    }
}

TEST_CASE("fnv-1a 64 reference vectors") {
    // Published FNV-1a test vectors: offset basis for "", and the
    // standard single-character digests.
    Fnv64 empty;
    CHECK(empty.digest() == 0xcbf29ce484222325ull);

    Fnv64 a;
    a.update("a");
    CHECK(a.digest() == 0xaf63dc4c8601ec8cull);

    Fnv64 foobar;
    foobar.update("foobar");
    CHECK(foobar.digest() == 0x85944171f73967e8ull);

    SUBCASE("hex format is 16 lowercase digits") {
        CHECK(a.hex().size() == 16);
        CHECK(a.hex() == "af63dc4c8601ec8c");
    }
    SUBCASE("incremental updates equal one-shot") {
        Fnv64 one, two;
        one.update("hello world");
        two.update("hello ");
        two.update("world");
        CHECK(one.digest() == two.digest());
    }
}

TEST_CASE("hash_file_hex matches in-memory digest") {
    const std::string path = "core_hash_probe.bin";
    const std::string payload = std::string("payload\0with\xff""bytes", 18);
    {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        f.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    }
    Fnv64 h;
    h.update(payload);
    CHECK(hash_file_hex(path) == h.hex());
    std::remove(path.c_str());
}

TEST_CASE("vec2 algebra") {
    const Vec2 v{3.0, 4.0};
    CHECK(v.norm() == doctest::Approx(5.0));
    CHECK(v.dot({1.0, 0.0}) == doctest::Approx(3.0));
    CHECK(v.cross({1.0, 0.0}) == doctest::Approx(-4.0));
    CHECK(v.perp().x == doctest::Approx(-4.0));
    CHECK(v.perp().y == doctest::Approx(3.0));

    SUBCASE("rotation by 90 degrees maps x to y") {
        const Vec2 r = rotate({1.0, 0.0}, 3.14159265358979323846 / 2.0);
        CHECK(r.x == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(r.y == doctest::Approx(1.0));
    }
    SUBCASE("rotation preserves length") {
        const Vec2 r = rotate(v, 1.234);
        CHECK(r.norm() == doctest::Approx(v.norm()));
    }
    SUBCASE("scalar cross matches rotation derivative") {
        const Vec2 r = cross(2.0, {1.0, 0.0});
        CHECK(r.x == doctest::Approx(0.0));
        CHECK(r.y == doctest::Approx(2.0));
    }
}
