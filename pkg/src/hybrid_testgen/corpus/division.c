int main() {
 int p = __VERIFIER_nondet_int();
 int q = __VERIFIER_nondet_int();
 if (q != 0) {
  int r = p % q;
  if (r < 0) {
   r = -r;
  }
  if (p / q == 12 && r == 5) {
   reach_error();
  }
 }
 int z = 100 / (p - 3);
 if (z > 10) {
  return 1;
 }
 return 0;
}
