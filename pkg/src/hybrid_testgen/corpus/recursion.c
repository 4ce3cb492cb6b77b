int fib(int n) {
 if (n < 2) {
  return n;
 }
 return fib(n - 1) + fib(n - 2);
}

int main() {
 int n = __VERIFIER_nondet_int();
 if (n < 0) {
  n = -n;
 }
 if (n > 10) {
  n = 10;
 }
 if (fib(n) == 21) {
  reach_error();
 }
 return 0;
}
