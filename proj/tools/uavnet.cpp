#include "uavnet/cli.hpp"

int main(int argc, char** argv) { return uavnet::cli_main(argc, argv); }
