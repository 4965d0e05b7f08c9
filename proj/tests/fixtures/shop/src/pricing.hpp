#pragma once

#include <string>

#include "model.hpp"

namespace shop::pricing {

long line_total(const Item& item);
long subtotal(const Order& order);
long apply_coupon(long cents, const Coupon& coupon);
long tax_for(long cents, int rate_bp);
int tier_discount_percent(const Customer& customer);
bool is_bulk(const Item& item);
std::string format_cents(long cents);
Receipt make_receipt(const Order& order, int rate_bp);
void normalize(Order& order);

}  // namespace shop::pricing
