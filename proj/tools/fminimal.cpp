#include "fminimal/cli.hpp"

int main(int argc, char** argv) { return fminimal::main_entry(argc, argv); }
