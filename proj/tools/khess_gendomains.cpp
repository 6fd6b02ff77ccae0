// Writes the standard domain gallery (balls, ellipse families, spheroids,
// dumbbells) as JSON files consumable by the khess CLI.

#include <filesystem>
#include <iostream>
#include <string>

#include "khess/domain_io.hpp"
#include "khess/shapes.hpp"

int main(int argc, char** argv)
{
    using namespace khess;
    const std::string dir = argc > 1 ? argv[1] : "domains";
    std::filesystem::create_directories(dir);
    auto path = [&](const std::string& leaf) { return dir + "/" + leaf; };

    io::save_domain(geom::make_ball(2, 1.0), path("disk.json"), "unit disk");
    io::save_domain(geom::make_ball(3, 1.0), path("ball3.json"), "unit ball n=3");
    io::save_domain(shapes::make_ellipse(2.0, 1.0), path("ellipse21.json"), "ellipse a=2 b=1");
    io::save_domain(shapes::make_perturbed_disk(0.1, 3), path("perturbed_disk.json"),
                    "rho = 1 + 0.1 cos(3 theta)");

    for (int i = 1; i <= 10; ++i) {
        const double eps = 0.02 * i;
        char leaf[64];
        std::snprintf(leaf, sizeof(leaf), "ellipse_eps%03d.json", static_cast<int>(eps * 100));
        char name[64];
        std::snprintf(name, sizeof(name), "area-preserving ellipse eps=%.2f", eps);
        io::save_domain(shapes::make_ellipse_family(eps), path(leaf), name, eps);
    }
    for (double eps : {0.05, 0.1, 0.2}) {
        char leaf[64];
        std::snprintf(leaf, sizeof(leaf), "spheroid_eps%03d.json", static_cast<int>(eps * 100));
        char name[64];
        std::snprintf(name, sizeof(name), "spheroid of revolution eps=%.2f", eps);
        io::save_domain(shapes::make_spheroid(1.0, 1.0 + eps), path(leaf), name, eps);
    }
    for (double w : {0.2, 0.1, 0.05}) {
        char leaf[64];
        std::snprintf(leaf, sizeof(leaf), "dumbbell_w%03d.json", static_cast<int>(w * 100));
        char name[64];
        std::snprintf(name, sizeof(name), "two-lobe star dumbbell w=%.2f", w);
        io::save_domain(shapes::make_dumbbell(w), path(leaf), name, w);
    }
    std::cout << "wrote domain gallery to " << dir << "\n";
    return 0;
}
