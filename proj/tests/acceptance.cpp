// Acceptance criteria 1-10: one line each, nonzero exit if any fails.
// Optional arguments select criteria by number.
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "chaotherm/acceptance.hpp"

int main(int argc, char** argv) {
    chaotherm::AcceptanceOptions opt;
    std::vector<int> ids = chaotherm::suite_criteria("full");
    if (argc > 1) {
        ids.clear();
        for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
    }
    int failed = 0;
    for (int id : ids) {
        auto r = chaotherm::run_criterion(id, opt);
        std::cout << chaotherm::format_result(r) << std::endl;
        if (!r.pass) ++failed;
    }
    std::cout << (ids.size() - failed) << "/" << ids.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
