#include "pdcal/cli.hpp"

int main(int argc, char** argv) { return pdcal::cli::run(argc, argv); }
