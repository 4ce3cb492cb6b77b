int main() {
 int a = __VERIFIER_nondet_int();
 int b = __VERIFIER_nondet_int();
 if (a > 5000 && b < -5000 && (a - 5000) * (a - 5000) + (b + 7000) * (b + 7000) == 325) {
  int i = 0;
  int y = a;
  while (i < 12) {
   y = y + b;
   i = i + 1;
  }
  int z = __VERIFIER_nondet_int();
  if ((y + z) % 13 == 5) {
   reach_error();
  }
 }
 return 0;
}
