"""Recipe lookup tools backed by recipes.tsv in the same directory."""

import os

_DB_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), "recipes.tsv")
_DISHES = None


def _load():
    global _DISHES
    if _DISHES is None:
        _DISHES = {}
        with open(_DB_PATH, encoding="utf-8") as f:
            for line in f:
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                dish, _, ingredients = line.partition("\t")
                _DISHES[dish.strip()] = [i.strip() for i in ingredients.split("|") if i.strip()]
    return _DISHES


def get_ingredient_from_dish(dish):
    """Returns the list of ingredients for a dish, or [] if the dish is unknown."""
    return list(_load().get(dish.strip(), []))


def get_dish_from_ingredient(ingredient):
    """Returns the list of dishes that use an ingredient, or [] if none do."""
    key = ingredient.strip()
    return [d for d, ings in _load().items() if key in ings]
