int sum_to(int n) {
 int s = 0;
 int i = 0;
 while (i < n) {
  s = s + i;
  i = i + 1;
 }
 return s;
}

int main() {
 int n = __VERIFIER_nondet_int();
 if (n < 0 || n > 20) {
  return 1;
 }
 int s = sum_to(n);
 if (s == 45) {
  reach_error();
 }
 int k = 3;
 while (k > 0) {
  k = k - 1;
 }
 return 0;
}
