#include "msbem/cli.hpp"

int main(int argc, char **argv) { return msbem::run_cli(argc, argv); }
