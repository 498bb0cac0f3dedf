#include <projreg/cli.hpp>

#include <iostream>

int main(int argc, char **argv)
{
	return projreg::cli::run(argc, argv, std::cout, std::cerr);
}
