#include "ecsrep/cli.hpp"

int main(int argc, char** argv) { return ecsrep::run_cli(argc, argv); }
