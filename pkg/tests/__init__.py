# cprover test suite
