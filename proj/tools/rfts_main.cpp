#include "rfts/cli.hpp"

int main(int argc, char** argv) { return rfts::run_cli(argc, argv); }
