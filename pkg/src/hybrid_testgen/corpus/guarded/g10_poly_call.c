int h(int x) {
 return x * x + 7 * x;
}

int main() {
 int a = __VERIFIER_nondet_int();
 if (h(a) == 8918) {
  int i = 0;
  int y = a;
  while (i < 15) {
   y = y + 4;
   i = i + 1;
  }
  int z = __VERIFIER_nondet_int();
  if ((y + z) % 13 == 1) {
   reach_error();
  }
 }
 return 0;
}
