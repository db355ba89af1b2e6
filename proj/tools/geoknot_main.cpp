#include "geoknot/cli.hpp"

int main(int argc, char** argv) { return geoknot::cli_dispatch(argc, argv); }
